use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use scanboard::corpus::UnknownPolicy;
use scanboard::error_model::io::{write_timing_csv, ParamsFile};
use scanboard::layout::io::LayoutFile;
use scanboard::synth::{simulate_timing, CountMode};
use scanboard::GammaParams;
use scanboard_cli::{
    cmd_demo_export_check, cmd_errortable, cmd_fit, cmd_optimize, evaluate_metrics, CorpusArgs,
    EvaluateArgs, FitInput, OptimizeArgs, SolverKind, EXIT_INFEASIBLE,
};
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn quotes() -> CorpusArgs {
    CorpusArgs {
        path: data("quotes.txt"),
        unknown: UnknownPolicy::Skip,
        fold_case: true,
    }
}

fn optimize_args(epsilon: f64, out: PathBuf) -> OptimizeArgs {
    OptimizeArgs {
        corpus: quotes(),
        spec: Some(data("spec_8x8.json")),
        params: data("params.json"),
        epsilon,
        duration: 0.35,
        solver: SolverKind::Exact,
        seed: 0,
        restarts: 4,
        out,
        trace: None,
    }
}

fn read_layout(path: &Path) -> LayoutFile {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fit_recovers_generator_and_writes_scattergram() {
    let dir = TempDir::new().unwrap();
    let truth = [
        (1, GammaParams::new(1.5, 0.4).unwrap()),
        (3, GammaParams::new(2.0, 0.5).unwrap()),
    ];
    let conditions: Vec<_> = truth.iter().map(|&(j, p)| (0.35, j, p)).collect();
    let obs = simulate_timing::<rand_chacha::ChaCha8Rng>(&conditions, 100_000, CountMode::Expected)
        .unwrap();
    let timing = dir.path().join("timing.csv");
    let mut buf = Vec::new();
    write_timing_csv(&mut buf, &obs).unwrap();
    fs::write(&timing, buf).unwrap();

    let (params, scatter) = (
        dir.path().join("params.json"),
        dir.path().join("scatter.csv"),
    );
    let out = cmd_fit(&FitInput::Timing(timing), &params, &scatter).unwrap();
    assert_eq!(out.code, 0);
    let fitted = ParamsFile::from_json(&fs::read_to_string(&params).unwrap()).unwrap();
    for (&(j, p), e) in truth.iter().zip(&fitted.conditions) {
        assert_eq!(e.row, j);
        assert!(
            (e.kappa - p.kappa()).abs() <= 0.1 && (e.theta - p.theta()).abs() <= 0.05,
            "{e:?}"
        );
    }
    assert_eq!(
        fs::read_to_string(&scatter).unwrap().lines().count(),
        1 + 3 * truth.len()
    );
}

#[test]
fn fit_reports_malformed_line() {
    let dir = TempDir::new().unwrap();
    let timing = dir.path().join("bad.csv");
    fs::write(
        &timing,
        "duration,target_row,n_early,n_correct,n_miss\n0.35,1,5,90,5\n0.35,two,1,1,1\n",
    )
    .unwrap();
    let err = cmd_fit(
        &FitInput::Timing(timing),
        &dir.path().join("p.json"),
        &dir.path().join("s.csv"),
    )
    .unwrap_err();
    assert!(format!("{err:#}").contains("line 3"), "{err:#}");
}

#[test]
fn budget_trade_off_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let (tight, loose) = (dir.path().join("tight.json"), dir.path().join("loose.json"));
    assert_eq!(
        cmd_optimize(&optimize_args(0.30, tight.clone()))
            .unwrap()
            .code,
        0
    );
    assert_eq!(
        cmd_optimize(&optimize_args(0.50, loose.clone()))
            .unwrap()
            .code,
        0
    );
    let (t, l) = (read_layout(&tight), read_layout(&loose));
    assert!(t.error_cost <= 0.30 + 1e-9 && l.error_cost <= 0.50 + 1e-9);
    assert!(l.time_cost <= t.time_cost);

    let eval = |layout: Option<PathBuf>| {
        evaluate_metrics(&EvaluateArgs {
            layout,
            corpus: quotes(),
            spec: Some(data("spec_8x8.json")),
            params: data("params.json"),
            duration: Some(0.35),
        })
        .unwrap()
        .0
    };
    let m = eval(Some(tight.clone()));
    assert!(
        (m.time_cost - t.time_cost).abs() <= 1e-12 && (m.error_cost - t.error_cost).abs() <= 1e-12
    );
    let baseline = eval(None);
    if baseline.error_cost <= 0.30 {
        assert!(baseline.time_cost >= t.time_cost);
    }
    assert!(baseline.time_cost >= l.time_cost);
}

#[test]
fn corrupted_layout_is_rejected() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("layout.json");
    cmd_optimize(&optimize_args(0.5, path.clone())).unwrap();
    let mut layout = read_layout(&path);
    layout.grid[0][0] = layout.grid[0][1].clone();
    fs::write(&path, layout.to_json()).unwrap();
    let args = EvaluateArgs {
        layout: Some(path.clone()),
        corpus: quotes(),
        spec: None,
        params: data("params.json"),
        duration: None,
    };
    let err = evaluate_metrics(&args).unwrap_err();
    assert!(format!("{err:#}").contains("does not match"), "{err:#}");
    fs::write(&path, "{\"rows\": 2}").unwrap();
    assert!(evaluate_metrics(&args).is_err());
}

#[test]
fn brute_and_exact_agree_on_toy_spec() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"rows":3,"cols":3,"inventory":["e","t","a","o"," ","n","s","h","r"],"fixed":[[5,1,1]]}"#).unwrap();
    let corpus = dir.path().join("corpus.txt");
    fs::write(
        &corpus,
        "the rain on the shore, so near the sea; no one hears others",
    )
    .unwrap();
    let run = |solver, name: &str| {
        let out = dir.path().join(name);
        let mut args = optimize_args(0.35, out.clone());
        args.corpus = CorpusArgs {
            path: corpus.clone(),
            unknown: UnknownPolicy::Skip,
            fold_case: false,
        };
        args.spec = Some(spec.clone());
        args.solver = solver;
        assert_eq!(cmd_optimize(&args).unwrap().code, 0);
        read_layout(&out)
    };
    let (exact, brute) = (
        run(SolverKind::Exact, "exact.json"),
        run(SolverKind::Brute, "brute.json"),
    );
    assert_eq!(exact.solver.status, "Optimal");
    assert!((exact.time_cost - brute.time_cost).abs() <= 1e-12);
    let hill = run(SolverKind::Hill, "hill.json");
    assert!(hill.time_cost >= exact.time_cost - 1e-12);
}

#[test]
fn zero_budget_exits_infeasible() {
    let dir = TempDir::new().unwrap();
    let out = cmd_optimize(&optimize_args(0.0, dir.path().join("none.json"))).unwrap();
    assert_eq!(out.code, EXIT_INFEASIBLE);
    assert!(out.stdout.contains("Infeasible"));
    assert!(!dir.path().join("none.json").exists());
}

#[test]
fn export_check_reports() {
    let dir = TempDir::new().unwrap();
    let good = dir.path().join("good.csv");
    let mut csv = String::from("duration,target_row,elapsed_seconds\n");
    for i in 0..200 {
        csv.push_str(&format!("0.35,{},{}\n", 1 + i % 2, 0.4 + 0.001 * i as f64));
    }
    fs::write(&good, csv).unwrap();
    let out = cmd_demo_export_check(&good).unwrap();
    assert_eq!(out.code, 0);
    assert!(
        out.stdout.contains("conditions: 2") && out.stdout.contains("trials=100"),
        "{}",
        out.stdout
    );

    let negative = dir.path().join("neg.csv");
    fs::write(
        &negative,
        "duration,target_row,elapsed_seconds\n0.35,1,-0.2\n",
    )
    .unwrap();
    assert!(cmd_demo_export_check(&negative).is_err());

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = cmd_demo_export_check(&empty).unwrap();
    assert_ne!(out.code, 0);
    assert!(out.stdout.contains("conditions: 0"));
}

#[test]
fn errortable_lists_every_position() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("table.csv");
    cmd_errortable(&data("params.json"), None, 0.35, &out).unwrap();
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 65);
    assert!(text.lines().skip(1).all(|l| {
        let p: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        (0.0..=1.0).contains(&p)
    }));
}

#[test]
fn binary_exit_codes_and_trace() {
    let dir = TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_scanboard");
    let base = |eps: &str, out: &Path| {
        let mut c = Command::new(bin);
        c.args([
            "optimize",
            "--fold-case",
            "--duration",
            "0.35",
            "--epsilon",
            eps,
        ])
        .arg("--corpus")
        .arg(data("quotes.txt"))
        .arg("--params")
        .arg(data("params.json"))
        .arg("--out")
        .arg(out);
        c
    };
    let trace = dir.path().join("trace.csv");
    let status = base("0.3", &dir.path().join("a.json"))
        .arg("--trace")
        .arg(&trace)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let rows = fs::read_to_string(&trace).unwrap();
    assert!(rows.starts_with("node,bound,incumbent,depth\n") && rows.lines().count() > 2);
    let status = base("0", &dir.path().join("b.json"))
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(EXIT_INFEASIBLE));
    let status = Command::new(bin)
        .args(["optimize", "--epsilon", "0.3"])
        .output()
        .unwrap()
        .status;
    assert!(!status.success());
}
