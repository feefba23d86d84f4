//! Command implementations behind the `scanboard` binary.
//!
//! Each command reads its inputs, writes its artifacts and returns the text
//! meant for standard output together with the process exit code.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

use scanboard::corpus::{case_fold, load_corpus, CharacterFrequencies, UnknownPolicy};
use scanboard::error_model::io::{
    read_raw_samples_csv, read_timing_csv, write_scattergram, write_timing_csv, ParamsFile,
};
use scanboard::error_model::{
    build_error_table, category_probs, classify_elapsed, fit_gamma_counts, fit_gamma_samples,
    ErrorTable, FitReport, GammaParams, Outcome, RawTimingSamples, MIN_RAW_SAMPLES,
};
use scanboard::layout::io::{read_spec_json, LayoutFile, SolverSummary};
use scanboard::layout::{evaluate, Assignment, CursorConfig, KeyboardSpec, LayoutMetrics};
use scanboard::solver::{
    solve_brute, solve_exact, solve_hill_climb, sweep_durations, ExactOptions, HillOptions,
    Instance, OptResult, Problem, SolverError,
};
use scanboard::synth::{simulate_timing, CountMode};
use scanboard::SolveStatus;

/// Exit code for a command that ran but found no feasible layout.
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl CommandOutput {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            code: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Exact,
    Hill,
    Brute,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Hill => "hill",
            SolverKind::Brute => "brute",
        }
    }
}

/// Corpus text and how to tally it.
#[derive(Debug, Clone)]
pub struct CorpusArgs {
    pub path: PathBuf,
    pub unknown: UnknownPolicy,
    pub fold_case: bool,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn load_spec(path: Option<&Path>) -> Result<KeyboardSpec> {
    match path {
        None => Ok(KeyboardSpec::default_8x8()),
        Some(p) => {
            read_spec_json(&read_text(p)?).with_context(|| format!("in spec file {}", p.display()))
        }
    }
}

/// Frequencies and the hex SHA-256 of the corpus file bytes.
pub fn load_frequencies(
    corpus: &CorpusArgs,
    spec: &KeyboardSpec,
) -> Result<(CharacterFrequencies, String)> {
    let bytes =
        fs::read(&corpus.path).with_context(|| format!("reading {}", corpus.path.display()))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes)
        .with_context(|| format!("{} is not UTF-8", corpus.path.display()))?;
    let text = if corpus.fold_case {
        case_fold(&text)
    } else {
        text
    };
    let freqs = load_corpus(&text, spec.inventory(), corpus.unknown)
        .with_context(|| format!("in corpus {}", corpus.path.display()))?;
    Ok((freqs, digest))
}

pub fn load_params(path: &Path) -> Result<ParamsFile> {
    ParamsFile::from_json(&read_text(path)?)
        .with_context(|| format!("in params file {}", path.display()))
}

/// Error table at `d`, with a warning line per row whose parameters were
/// fitted at a different duration.
pub fn error_table_at(
    params: &ParamsFile,
    spec: &KeyboardSpec,
    d: f64,
) -> Result<(ErrorTable<f64>, String)> {
    let mut warnings = String::new();
    for (row, fitted) in params.substituted_durations(d) {
        let _ = writeln!(
            warnings,
            "warning: stage {row} has no fit at D={d}; using D={fitted}"
        );
    }
    let stage = params.row_params_at(d)?;
    let table = build_error_table(&stage, None, spec, d)?;
    Ok((table, warnings))
}

fn format_metric(x: f64) -> String {
    format!("{x:.6}")
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

// ---------------------------------------------------------------- fit

pub enum FitInput {
    Timing(PathBuf),
    Samples(PathBuf),
}

/// Fits every condition in the input and writes the params file and the
/// observed-versus-model scattergram.
pub fn cmd_fit(input: &FitInput, out: &Path, scatter: &Path) -> Result<CommandOutput> {
    let mut stderr = String::new();
    let reports = match input {
        FitInput::Timing(path) => {
            let obs = read_timing_csv(
                fs::File::open(path).with_context(|| format!("reading {}", path.display()))?,
            )
            .with_context(|| format!("in timing file {}", path.display()))?;
            let mut reports = Vec::new();
            for condition in obs.conditions() {
                match fit_gamma_counts(&obs, condition) {
                    Ok(r) => reports.push(r),
                    Err(e) => {
                        let _ = writeln!(
                            stderr,
                            "warning: D={} row={}: {e}",
                            condition.duration, condition.row
                        );
                    }
                }
            }
            reports
        }
        FitInput::Samples(path) => {
            let groups = read_raw_samples_csv(
                fs::File::open(path).with_context(|| format!("reading {}", path.display()))?,
            )
            .with_context(|| format!("in sample file {}", path.display()))?;
            let mut reports = Vec::new();
            for g in &groups {
                match fit_samples_report(g) {
                    Ok(r) => reports.push(r),
                    Err(e) => {
                        let _ = writeln!(
                            stderr,
                            "warning: D={} row={}: {e}",
                            g.duration, g.target_row
                        );
                    }
                }
            }
            reports
        }
    };
    if reports.is_empty() {
        bail!("no condition could be fitted");
    }
    write_file(out, ParamsFile::from_reports(&reports).to_json())?;
    let mut buf = Vec::new();
    write_scattergram(&mut buf, &reports)?;
    write_file(scatter, buf)?;

    let mut stdout = String::from("duration,row,kappa,theta,goodness,degenerate\n");
    for r in &reports {
        let _ = writeln!(
            stdout,
            "{},{},{},{},{:.3e},{}",
            r.condition.duration,
            r.condition.row,
            format_metric(r.params.kappa()),
            format_metric(r.params.theta()),
            r.goodness,
            r.degenerate
        );
    }
    Ok(CommandOutput {
        stdout,
        stderr,
        code: 0,
    })
}

/// Likelihood fit of one raw-sample group, scored like a count fit against
/// the binned outcomes.
fn fit_samples_report(g: &RawTimingSamples<f64>) -> Result<FitReport<f64>> {
    let params = fit_gamma_samples(g)?;
    let mut counts = [0u64; 3];
    for &x in &g.elapsed {
        let i = match classify_elapsed(g.duration, g.target_row, x) {
            Outcome::Early => 0,
            Outcome::Correct => 1,
            Outcome::Miss => 2,
        };
        counts[i] += 1;
    }
    let trials: u64 = counts.iter().sum();
    let t = trials as f64;
    let observed = scanboard::error_model::CategoryProbs {
        early: counts[0] as f64 / t,
        correct: counts[1] as f64 / t,
        miss: counts[2] as f64 / t,
    };
    let model = category_probs(&params, g.duration, g.target_row)?;
    let goodness = model
        .as_array()
        .iter()
        .zip(observed.as_array())
        .map(|(m, o)| (m - o) * (m - o))
        .sum();
    Ok(FitReport {
        condition: scanboard::error_model::Condition {
            duration: g.duration,
            row: g.target_row,
        },
        params,
        goodness,
        degenerate: false,
        observed,
        model,
        trials,
    })
}

// ---------------------------------------------------------------- errortable

/// Writes `row,col,p_error` for every grid position at duration `d`.
pub fn cmd_errortable(
    params: &Path,
    spec: Option<&Path>,
    d: f64,
    out: &Path,
) -> Result<CommandOutput> {
    let spec = load_spec(spec)?;
    let (table, warnings) = error_table_at(&load_params(params)?, &spec, d)?;
    let mut csv = String::from("row,col,p_error\n");
    for (j, row) in table.to_rows().iter().enumerate() {
        for (k, p) in row.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{}", j + 1, k + 1, p);
        }
    }
    write_file(out, csv)?;
    Ok(CommandOutput {
        stdout: format!("wrote {}x{} error table\n", table.rows(), table.cols()),
        stderr: warnings,
        code: 0,
    })
}

// ---------------------------------------------------------------- optimize

pub struct OptimizeArgs {
    pub corpus: CorpusArgs,
    pub spec: Option<PathBuf>,
    pub params: PathBuf,
    pub epsilon: f64,
    pub duration: f64,
    pub solver: SolverKind,
    pub seed: u64,
    pub restarts: usize,
    pub out: PathBuf,
    pub trace: Option<PathBuf>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        bail!("epsilon must lie in [0, 1], got {epsilon}");
    }
    Ok(())
}

fn run_solver(
    inst: &Instance<f64>,
    solver: SolverKind,
    seed: u64,
    restarts: usize,
    trace: bool,
) -> Result<OptResult<f64>> {
    Ok(match solver {
        SolverKind::Exact => solve_exact(
            inst,
            &ExactOptions {
                trace,
                ..ExactOptions::default()
            },
        ),
        SolverKind::Brute => solve_brute(inst)?,
        SolverKind::Hill => match solve_hill_climb(inst, &HillOptions { seed, restarts }) {
            Ok(r) => r,
            Err(SolverError::NoFeasibleStart) => OptResult {
                status: SolveStatus::Infeasible,
                solution: None,
                lower_bound: f64::INFINITY,
                node_count: 0,
                wall_time: Duration::ZERO,
                trace: Vec::new(),
            },
            Err(e) => return Err(e.into()),
        },
    })
}

fn summary_lines(result: &OptResult<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "status: {}", result.status.as_str());
    if let Some(sol) = &result.solution {
        let _ = writeln!(s, "C_t: {} s/char", format_metric(sol.metrics.time_cost));
        let _ = writeln!(s, "C_e: {}", format_metric(sol.metrics.error_cost));
    }
    if let Some(lb) = finite(result.lower_bound) {
        let _ = writeln!(s, "lower bound: {}", format_metric(lb));
    }
    let _ = writeln!(s, "nodes: {}", result.node_count);
    let _ = writeln!(s, "wall time: {:.3} s", result.wall_time.as_secs_f64());
    s
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<CommandOutput> {
    check_epsilon(args.epsilon)?;
    let spec = load_spec(args.spec.as_deref())?;
    let (freqs, digest) = load_frequencies(&args.corpus, &spec)?;
    let cfg = CursorConfig::new(args.duration)?;
    let (table, warnings) = error_table_at(&load_params(&args.params)?, &spec, args.duration)?;
    let inst = Instance::build(&spec, &freqs, &cfg, &table, args.epsilon)?;
    let result = run_solver(
        &inst,
        args.solver,
        args.seed,
        args.restarts,
        args.trace.is_some(),
    )?;

    if let Some(path) = &args.trace {
        let mut csv = String::from("node,bound,incumbent,depth\n");
        for row in &result.trace {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                row.node, row.bound, row.incumbent, row.depth
            );
        }
        write_file(path, csv)?;
    }
    let mut stdout = summary_lines(&result);
    let Some(sol) = &result.solution else {
        return Ok(CommandOutput {
            stdout,
            stderr: warnings,
            code: EXIT_INFEASIBLE,
        });
    };
    let assign = inst.assignment(&sol.slots, &spec)?;
    let layout = LayoutFile {
        rows: spec.rows(),
        cols: spec.cols(),
        grid: LayoutFile::grid_tokens(&assign, &spec),
        duration: args.duration,
        epsilon: args.epsilon,
        time_cost: sol.metrics.time_cost,
        error_cost: sol.metrics.error_cost,
        solver: SolverSummary {
            name: args.solver.as_str().to_string(),
            status: result.status.as_str().to_string(),
            lower_bound: finite(result.lower_bound),
            node_count: result.node_count,
        },
        corpus_sha256: digest,
    };
    write_file(&args.out, layout.to_json())?;
    stdout.push_str(&render_grid(&layout.grid));
    Ok(CommandOutput {
        stdout,
        stderr: warnings,
        code: 0,
    })
}

fn render_grid(grid: &[Vec<String>]) -> String {
    let mut s = String::new();
    for row in grid {
        let cells: Vec<String> = row
            .iter()
            .map(|t| match t.as_str() {
                " " => "_".to_string(),
                "\\blank" => "#".to_string(),
                other => other.to_string(),
            })
            .collect();
        let _ = writeln!(s, "{}", cells.join(" "));
    }
    s
}

// ---------------------------------------------------------------- evaluate

pub struct EvaluateArgs {
    pub layout: Option<PathBuf>,
    pub corpus: CorpusArgs,
    pub spec: Option<PathBuf>,
    pub params: PathBuf,
    /// Defaults to the duration stored in the layout file.
    pub duration: Option<f64>,
}

/// Costs of a layout file, or of the in-order baseline when no layout is
/// given, with any parameter-substitution warnings.
pub fn evaluate_metrics(args: &EvaluateArgs) -> Result<(LayoutMetrics<f64>, String)> {
    let spec = load_spec(args.spec.as_deref())?;
    let (assign, stored_d) = match &args.layout {
        Some(path) => {
            let file: LayoutFile = serde_json::from_str(&read_text(path)?)
                .map_err(|e| scanboard::layout::LayoutError::LayoutSpecMismatch(e.to_string()))
                .with_context(|| format!("in layout file {}", path.display()))?;
            let assign = file
                .assignment(&spec)
                .with_context(|| format!("in layout file {}", path.display()))?;
            (assign, Some(file.duration))
        }
        None => (Assignment::in_order(&spec), None),
    };
    let Some(d) = args.duration.or(stored_d) else {
        bail!("--duration is required when evaluating the in-order baseline");
    };
    let (freqs, _) = load_frequencies(&args.corpus, &spec)?;
    let (table, warnings) = error_table_at(&load_params(&args.params)?, &spec, d)?;
    Ok((
        evaluate(&assign, &freqs, &CursorConfig::new(d)?, &table)?,
        warnings,
    ))
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<CommandOutput> {
    let (m, warnings) = evaluate_metrics(args)?;
    let stdout = format!(
        "C_t: {} s/char\nC_e: {}\n",
        format_metric(m.time_cost),
        format_metric(m.error_cost)
    );
    Ok(CommandOutput {
        stdout,
        stderr: warnings,
        code: 0,
    })
}

// ---------------------------------------------------------------- sweep

pub struct SweepArgs {
    pub corpus: CorpusArgs,
    pub spec: Option<PathBuf>,
    pub params: PathBuf,
    pub epsilon: f64,
    pub durations: Vec<f64>,
    pub out: PathBuf,
}

/// Solves each duration exactly and writes one CSV row per duration in
/// input order, flagging the fastest feasible one.
pub fn cmd_sweep(args: &SweepArgs) -> Result<CommandOutput> {
    check_epsilon(args.epsilon)?;
    let spec = load_spec(args.spec.as_deref())?;
    let (freqs, _) = load_frequencies(&args.corpus, &spec)?;
    let params = load_params(&args.params)?;
    let mut stderr = String::new();
    for &d in &args.durations {
        if d > 0.0 {
            for (row, fitted) in params.substituted_durations(d) {
                let _ = writeln!(
                    stderr,
                    "warning: stage {row} has no fit at D={d}; using D={fitted}"
                );
            }
        }
    }
    let problem = Problem::with_tables(&spec, &freqs, |d: f64| {
        let stage: BTreeMap<usize, GammaParams<f64>> = params
            .row_params_at(d)
            .map_err(|e| SolverError::InvalidInstance(e.to_string()))?;
        Ok(build_error_table(&stage, None, &spec, d)?)
    });
    let report = match sweep_durations(
        &problem,
        &args.durations,
        args.epsilon,
        &ExactOptions::default(),
    ) {
        Ok(r) => r,
        Err(SolverError::AllInfeasible) => {
            return Ok(CommandOutput {
                stdout: "no duration admits a feasible layout\n".into(),
                stderr,
                code: EXIT_INFEASIBLE,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let mut csv = String::from("duration,status,C_t,C_e,lower_bound,node_count,best\n");
    let mut stdout = String::new();
    for (i, e) in report.entries.iter().enumerate() {
        let r = &e.result;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            e.duration,
            r.status.as_str(),
            opt(r.time_cost()),
            opt(r.error_cost()),
            opt(finite(r.lower_bound)),
            r.node_count,
            i == report.best
        );
        let _ = writeln!(
            stdout,
            "D={} {} C_t={} C_e={}{}",
            e.duration,
            r.status.as_str(),
            r.time_cost()
                .map(format_metric)
                .unwrap_or_else(|| "-".into()),
            r.error_cost()
                .map(format_metric)
                .unwrap_or_else(|| "-".into()),
            if i == report.best { " *" } else { "" }
        );
    }
    write_file(&args.out, csv)?;
    Ok(CommandOutput {
        stdout,
        stderr,
        code: 0,
    })
}

// ---------------------------------------------------------------- demo-export-check

/// Validates a raw-sample export and reports trial counts per condition.
/// Exits nonzero when the file holds no conditions.
pub fn cmd_demo_export_check(samples: &Path) -> Result<CommandOutput> {
    let groups = read_raw_samples_csv(
        fs::File::open(samples).with_context(|| format!("reading {}", samples.display()))?,
    )
    .with_context(|| format!("in sample file {}", samples.display()))?;
    let mut stdout = format!("conditions: {}\n", groups.len());
    let mut total = 0;
    for g in &groups {
        total += g.elapsed.len();
        let ready = if g.elapsed.len() >= MIN_RAW_SAMPLES {
            "fittable"
        } else {
            "too few trials"
        };
        let _ = writeln!(
            stdout,
            "D={} row={} trials={} {}",
            g.duration,
            g.target_row,
            g.elapsed.len(),
            ready
        );
    }
    let _ = writeln!(stdout, "trials: {total}");
    let code = if groups.is_empty() { 1 } else { 0 };
    Ok(CommandOutput {
        stdout,
        stderr: String::new(),
        code,
    })
}

// ---------------------------------------------------------------- simulate

pub struct SimulateArgs {
    pub params: PathBuf,
    pub durations: Vec<f64>,
    pub trials: u64,
    /// Seeded multinomial draws instead of expected counts.
    pub sampled: Option<u64>,
    pub out: PathBuf,
}

/// Writes a timing-count file generated from a params file.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<CommandOutput> {
    use rand::SeedableRng;

    let params = load_params(&args.params)?;
    let mut conditions = Vec::new();
    for &d in &args.durations {
        for (row, p) in params.row_params_at(d)? {
            conditions.push((d, row, p));
        }
    }
    let obs = match args.sampled {
        None => simulate_timing::<rand_chacha::ChaCha8Rng>(
            &conditions,
            args.trials,
            CountMode::Expected,
        )?,
        Some(seed) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            simulate_timing(&conditions, args.trials, CountMode::Sampled(&mut rng))?
        }
    };
    let mut buf = Vec::new();
    write_timing_csv(&mut buf, &obs)?;
    write_file(&args.out, buf)?;
    Ok(CommandOutput::ok(format!(
        "wrote {} conditions\n",
        obs.records.len()
    )))
}
