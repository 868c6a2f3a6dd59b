use std::path::Path;
use std::process::{Command, Output};

use bisr::experiment::{add_awgn, gen_sparse_signal, trial_rng, FilterPreset};
use bisr::io::{read_column, write_signal};

fn bisr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bisr")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_problem(dir: &Path) -> (String, String) {
    let h = FilterPreset::Example1Like.filter();
    let mut rng = trial_rng(9, 0);
    let x = gen_sparse_signal(60, 6, (-100.0, 100.0), &mut rng).unwrap();
    let y = add_awgn(&h.apply(&x).unwrap(), 2.0, &mut rng).unwrap();
    let yp = dir.join("y.csv");
    let hp = dir.join("h.csv");
    write_signal(&yp, &y).unwrap();
    std::fs::write(&hp, h.taps().iter().map(|t| format!("{t:.17e}\n")).collect::<String>()).unwrap();
    (yp.to_string_lossy().into_owned(), hp.to_string_lossy().into_owned())
}

#[test]
fn demo_runs_both_examples() {
    for ex in ["1", "2"] {
        let o = bisr(&["demo", "--example", ex]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let out = stdout(&o);
        assert!(out.contains("optimality") && out.contains("passed: true"));
    }
    let o = bisr(&["demo", "--example", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn demo_writes_signals() {
    let dir = tempfile::tempdir().unwrap();
    let o = bisr(&["demo", "--example", "2", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    for f in ["x_true.csv", "y.csv", "x_l1.csv", "x_l1_debias.csv", "x_bisr.csv", "scatter.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(read_column(&dir.path().join("x_bisr.csv")).unwrap().len(), 100);
}

#[test]
fn deconv_and_optimality_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (y, h) = write_problem(dir.path());
    let xp = dir.path().join("x.csv");
    let x = xp.to_str().unwrap();
    let o = bisr(&["deconv", "--input", &y, "--filter", &h, "--lambda", "3", "--auto", "--output", x, "--tol", "1e-8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_column(&xp).unwrap().len(), 60);
    let text = std::fs::read_to_string(&xp).unwrap();
    // every value carries 17 significant digits
    let v = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    assert_eq!(v.split('e').next().unwrap().trim_start_matches('-').replace('.', "").len(), 17);

    let o = bisr(&["optimality", "--input", &y, "--solution", x, "--filter", &h, "--lambda", "3", "--auto"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("passed        true"));

    // a wrong lambda makes the same solution non-optimal
    let o = bisr(&["optimality", "--input", &y, "--solution", x, "--filter", &h, "--lambda", "6", "--auto"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn deconv_rejects_uncertified_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let (y, h) = write_problem(dir.path());
    let o = bisr(&["deconv", "--input", &y, "--filter", &h, "--lambda", "3", "--a1", "1", "--a2", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = bisr(&["deconv", "--input", &y, "--filter", &h, "--lambda", "3", "--a1", "0.1", "--a2", "0.05", "--no-certify"]);
    assert_ne!(o.status.code(), Some(1));
    let o = bisr(&["deconv", "--input", &y, "--filter", &h, "--lambda", "-3", "--auto"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn deconv_reports_iteration_limit_as_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (y, h) = write_problem(dir.path());
    let o = bisr(&["deconv", "--input", &y, "--filter", &h, "--lambda", "3", "--auto", "--max-iter", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_convexity_reports_parameters() {
    let o = bisr(&["check-convexity", "--filter", "example1_like", "--lambda", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("max a1, a2    5.99999"), "{out}");
    let o = bisr(&["check-convexity", "--filter", "example2_null", "--lambda", "1", "--a1", "0.7", "--a2", "0"]);
    assert!(o.status.success());
    let o = bisr(&["check-convexity", "--filter", "example2_null", "--lambda", "1", "--a1", "0.7", "--a2", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    let o = bisr(&["check-convexity", "--filter", "/nonexistent/h.csv", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    std::fs::write(&cfg, r#"{"sigmas": [2, 4], "trials": 4, "seed": 3, "filter": "example2_null"}"#).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let t = dir.path().join("t.csv");
    for out in [&a, &b] {
        let o = bisr(&["sweep", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--timing", t.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("mean RMSE over 4 trials"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read_to_string(&a).unwrap().lines().count(), 1 + 2 * 5);

    std::fs::write(&cfg, r#"{"trials": 2, "n_impulses": 500}"#).unwrap();
    let o = bisr(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_domain_code() {
    assert_eq!(bisr(&["deconv"]).status.code(), Some(1));
    assert_eq!(bisr(&["frobnicate"]).status.code(), Some(1));
    assert!(bisr(&["--help"]).status.success());
}
