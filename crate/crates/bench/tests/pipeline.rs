use std::process::Command;
use std::sync::Arc;

use coba::problems::{ProblemInstance, ProblemKind};
use coba::FeasibleSet;
use coba_bench::grid::{A_GRID, M_GRID};
use coba_bench::plot::PLOT_FILES;
use coba_bench::record::{rows_from_csv, rows_to_csv};
use coba_bench::{emit_plots, grid_search, run, run_on, ClockMode, RunConfig};

fn config(text: &str) -> RunConfig {
    let mut c = RunConfig::from_text(text).unwrap();
    c.clock = ClockMode::Logical;
    c
}

fn series_count(svg: &str) -> usize {
    // Each series draws its line plus a legend swatch at width 2.
    svg.matches("stroke-width=\"2\"").count() / 2
}

#[test]
fn zero_gradient_problem_leaves_x_in_place() {
    let kind = ProblemKind::OnlineLogistic { truth: vec![0.5, -0.5, 1.0], feature_scale: 0.0 };
    let set = FeasibleSet::symmetric_box(3, 10.0).unwrap();
    let problem = ProblemInstance::new(kind, set, 3, 1.0).unwrap();
    let c = config("opt = sgd\nproblem = logistic\ndim = 3\nT = 1");
    let record = run_on(&c, &problem).unwrap();
    assert_eq!(record.rows.len(), 1);
    assert_eq!(record.summary.final_x, problem.initial_point().unwrap().to_f64_vec());
}

#[test]
fn row_count_and_clock() {
    let mut c = config("T = 300\nopt = adam");
    c.clock = ClockMode::Monotonic;
    let record = run(&c).unwrap();
    assert_eq!(record.rows.len(), 300);
    assert!(record.rows.windows(2).all(|w| w[0].wall_clock_ns <= w[1].wall_clock_ns));
    assert!(record.rows.iter().all(|r| r.regret.is_some() && r.accuracy.is_none()));
}

#[test]
fn degenerate_coba_matches_amsgrad_loss_column() {
    let base = "problem = logistic\ndim = 4\nT = 2000\nM = 0\nallow_degenerate = true\n";
    let coba = run(&config(&format!("{base}opt = coba-fr"))).unwrap();
    let ams = run(&config(&format!("{base}opt = amsgrad"))).unwrap();
    let losses = |r: &coba_bench::RunRecord| r.rows.iter().map(|r| r.loss.to_bits()).collect::<Vec<_>>();
    assert_eq!(losses(&coba), losses(&ams));
}

#[test]
fn accuracy_is_carried_between_epoch_ends() {
    let record = run(&config("problem = softmax\ndim = 2\nclasses = 3\nT = 2500\nopt = amsgrad")).unwrap();
    let acc: Vec<_> = record.rows.iter().map(|r| r.accuracy).collect();
    assert!(acc[..999].iter().all(Option::is_none));
    assert!(acc[999].is_some());
    assert_eq!(acc[1000], acc[999]);
    assert!(acc[2499].is_some());
    assert!(record.rows.iter().all(|r| r.regret.is_none()));
}

#[test]
fn theory_flag_rules() {
    let err = run(&config("problem = mlp\ntheory = true\nschedule = sqrt")).unwrap_err();
    assert!(err.to_string().contains("convex"), "{err}");
    assert!(run(&config("theory = true\nschedule = sqrt\nfeasible = full")).is_err());
    let ok = run(&config("theory = true\nschedule = sqrt\nalpha = 0.1\nT = 200\nopt = coba-dy")).unwrap();
    assert_eq!(ok.summary.theory_passed, Some(true));
    let report = ok.summary.theory.unwrap();
    assert_eq!(report.moment_sums.len(), 3);
    let last = ok.rows.last().unwrap().regret.unwrap();
    assert!((last - report.bound.regret).abs() <= 1e-9 * last.abs().max(1.0));
}

#[test]
fn grid_examples() {
    let base = config("T = 200\nopt = coba-prp");
    let one = grid_search(&base, &[1e-3], &[1.5], 1).unwrap();
    assert_eq!(one.cells.len(), 1);
    assert_eq!(one.best.hyper.damping, 1e-3);
    assert_eq!(one.best.hyper.damping_exponent, 1.5);

    let full = grid_search(&base, &M_GRID, &A_GRID, 4).unwrap();
    assert_eq!(full.cells.len(), 12);
    assert_eq!(full.table().lines().count(), 13);
    let again = grid_search(&base, &M_GRID, &A_GRID, 1).unwrap();
    assert_eq!(full, again, "thread count must not change the outcome");
}

#[test]
fn plots_one_series_per_record() {
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_plots(&[], dir.path()).is_err());

    let single = run(&config("T = 1500\nproblem = logistic\ndim = 3")).unwrap();
    let files = emit_plots(std::slice::from_ref(&single), dir.path()).unwrap();
    assert_eq!(files.len(), 4);
    for (f, name) in files.iter().zip(PLOT_FILES) {
        assert!(f.ends_with(name));
        assert_eq!(series_count(&std::fs::read_to_string(f).unwrap()), 1);
    }

    let records: Vec<_> = coba::OptimizerName::ROSTER
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let steps = 1000 + 500 * i;
            run(&config(&format!("opt = {name}\nT = {steps}\nproblem = logistic\ndim = 3"))).unwrap()
        })
        .collect();
    let out = dir.path().join("roster");
    for f in emit_plots(&records, &out).unwrap() {
        let svg = std::fs::read_to_string(&f).unwrap();
        assert_eq!(series_count(&svg), 10, "{}", f.display());
        for name in coba::OptimizerName::ROSTER {
            assert!(svg.contains(&format!(">\n{name}\n</text>")), "{name} missing from {}", f.display());
        }
    }
}

#[test]
fn csv_round_trip_of_a_real_run() {
    let record = run(&config("problem = softmax\nT = 1200\nopt = rmsprop")).unwrap();
    let bytes = rows_to_csv(&record.rows).unwrap();
    assert_eq!(rows_from_csv(&bytes).unwrap(), record.rows);
}

#[test]
fn summary_echoes_every_setting() {
    let record = run(&config("opt = coba-hz\nlambda = 3\nM = 1e-3\na = 1.5\nT = 10")).unwrap();
    let echo = &record.summary.config;
    for key in RunConfig::KEYS {
        assert!(echo.contains_key(key), "{key}");
    }
    assert_eq!(echo["lambda"], "3.0");
    assert_eq!(echo["M"], "0.001");
    assert_eq!(record.summary.hyper.gamma_kind, coba::GammaKind::Hz { lambda: 3.0 });
    let json = serde_json::to_value(&record.summary).unwrap();
    assert_eq!(json["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn shared_problem_instances_are_cheap_to_clone() {
    let p = ProblemInstance::<f64>::tiny_mlp(4, FeasibleSet::symmetric_box(17, 10.0).unwrap(), 1).unwrap();
    let q = p.clone();
    let (ProblemKind::TinyMlp { data: a, .. }, ProblemKind::TinyMlp { data: b, .. }) = (p.kind(), q.kind()) else {
        panic!()
    };
    assert!(Arc::ptr_eq(a, b));
}

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coba-bench"))
}

#[test]
fn cli_writes_outputs_and_exit_code_tracks_theory() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench()
        .args(["run", "--T", "100", "--schedule", "sqrt", "--alpha", "0.1", "--theory", "--clock", "logical"])
        .env("COBA_BENCH_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read(dir.path().join("quadratic-coba-hz-s0.csv")).unwrap();
    assert_eq!(rows_from_csv(&csv).unwrap().len(), 100);
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("quadratic-coba-hz-s0.json")).unwrap()).unwrap();
    assert_eq!(summary["theory_passed"], true);

    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "opt = amsgrad\nT = 50\nseed = 4\n").unwrap();
    let out = bench()
        .args(["run", "--config", cfg.to_str().unwrap(), "--T", "20"])
        .env("COBA_BENCH_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = rows_from_csv(&std::fs::read(dir.path().join("quadratic-amsgrad-s4.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 20, "flags override the file");

    let bad = bench().args(["run", "--opt", "momentum"]).env("COBA_BENCH_OUT", dir.path()).output().unwrap();
    assert!(!bad.status.success());
}
