use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scanboard::corpus::UnknownPolicy;
use scanboard_cli::{
    cmd_demo_export_check, cmd_errortable, cmd_evaluate, cmd_fit, cmd_optimize, cmd_simulate,
    cmd_sweep, CorpusArgs, EvaluateArgs, FitInput, OptimizeArgs, SimulateArgs, SolverKind,
    SweepArgs,
};

#[derive(Parser)]
#[command(
    name = "scanboard",
    version,
    about = "Fit switch-timing models and optimize row-column scanning keyboards"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Exact,
    Hill,
    Brute,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unknown {
    Skip,
    Error,
}

#[derive(Args)]
struct CorpusOpts {
    /// Text corpus to tally.
    #[arg(long)]
    corpus: PathBuf,
    /// What to do with corpus characters missing from the inventory.
    #[arg(long, value_enum, default_value = "skip")]
    unknown: Unknown,
    /// Lowercase the corpus before tallying.
    #[arg(long)]
    fold_case: bool,
}

impl CorpusOpts {
    fn to_args(&self) -> CorpusArgs {
        CorpusArgs {
            path: self.corpus.clone(),
            unknown: match self.unknown {
                Unknown::Skip => UnknownPolicy::Skip,
                Unknown::Error => UnknownPolicy::Error,
            },
            fold_case: self.fold_case,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit Gamma timing models per (duration, row) condition.
    Fit {
        /// Category-count file `duration,target_row,n_early,n_correct,n_miss`.
        #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
        timing: Option<PathBuf>,
        /// Raw-sample file `duration,target_row,elapsed_seconds`.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Observed-versus-model CSV; defaults next to --out.
        #[arg(long)]
        scatter: Option<PathBuf>,
    },
    /// Write the per-position error probabilities at one duration.
    Errortable {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        duration: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Find the fastest layout within the error budget.
    Optimize {
        #[command(flatten)]
        corpus: CorpusOpts,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        duration: f64,
        #[arg(long, value_enum, default_value = "exact")]
        solver: Solver,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random restarts for the hill climber.
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long)]
        out: PathBuf,
        /// Per-node search trace CSV (exact solver).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Recompute the costs of a layout, or of the in-order baseline.
    Evaluate {
        #[arg(long)]
        layout: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusOpts,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Solve exactly at several cursor durations.
    Sweep {
        #[command(flatten)]
        corpus: CorpusOpts,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        epsilon: f64,
        /// Comma-separated durations in seconds.
        #[arg(long, value_delimiter = ',', required = true)]
        durations: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a raw-sample export from the practice interface.
    DemoExportCheck {
        #[arg(long)]
        samples: PathBuf,
    },
    /// Generate a timing-count file from fitted parameters.
    Simulate {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        durations: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Draw multinomial counts with this seed instead of expected counts.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn solver_kind(s: Solver) -> SolverKind {
    match s {
        Solver::Exact => SolverKind::Exact,
        Solver::Hill => SolverKind::Hill,
        Solver::Brute => SolverKind::Brute,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit {
            timing,
            samples,
            out,
            scatter,
        } => {
            let input = match (timing, samples) {
                (Some(t), _) => FitInput::Timing(t),
                (None, Some(s)) => FitInput::Samples(s),
                (None, None) => unreachable!("clap requires one input"),
            };
            let scatter = scatter.unwrap_or_else(|| out.with_file_name("scattergram.csv"));
            cmd_fit(&input, &out, &scatter)
        }
        Command::Errortable {
            params,
            spec,
            duration,
            out,
        } => cmd_errortable(&params, spec.as_deref(), duration, &out),
        Command::Optimize {
            corpus,
            spec,
            params,
            epsilon,
            duration,
            solver,
            seed,
            restarts,
            out,
            trace,
        } => cmd_optimize(&OptimizeArgs {
            corpus: corpus.to_args(),
            spec,
            params,
            epsilon,
            duration,
            solver: solver_kind(solver),
            seed,
            restarts,
            out,
            trace,
        }),
        Command::Evaluate {
            layout,
            corpus,
            spec,
            params,
            duration,
        } => cmd_evaluate(&EvaluateArgs {
            layout,
            corpus: corpus.to_args(),
            spec,
            params,
            duration,
        }),
        Command::Sweep {
            corpus,
            spec,
            params,
            epsilon,
            durations,
            out,
        } => cmd_sweep(&SweepArgs {
            corpus: corpus.to_args(),
            spec,
            params,
            epsilon,
            durations,
            out,
        }),
        Command::DemoExportCheck { samples } => cmd_demo_export_check(&samples),
        Command::Simulate {
            params,
            durations,
            trials,
            seed,
            out,
        } => cmd_simulate(&SimulateArgs {
            params,
            durations,
            trials,
            sampled: seed,
            out,
        }),
    };
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            let _ = std::io::stdout().flush();
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
