use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_pdcert");

fn pdcert(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("PD_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn problems_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/problems"))
}

#[test]
fn lasso_pdhg_auto_certifies() {
    let o = pdcert(&[
        "run", "--algorithm", "pdhg", "--problem", "builtin:lasso", "--m", "10", "--n", "20", "--seed", "1",
        "--eta", "auto", "--iters", "1000", "--checks", "ergodic,inclusion",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn toy_auto_eta_is_one() {
    let o = pdcert(&["run", "--algorithm", "pdhg", "--problem", "builtin:toy_bilinear", "--eta", "auto", "--iters", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("eta = 1 (auto)\n"));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["run", "--algorithm", "ppm", "--problem", "builtin:toy_bilinear", "--eta", "1", "--iters", "0"][..],
        &["run", "--algorithm", "ppm", "--problem", "builtin:toy_bilinear", "--eta", "auto"],
        &["run", "--algorithm", "nope", "--problem", "builtin:toy_bilinear", "--eta", "1"],
        &["run", "--algorithm", "ppm", "--problem", "builtin:nope", "--eta", "1"],
        &["run", "--algorithm", "ppm", "--problem", "/nonexistent.json", "--eta", "1"],
        &["run", "--algorithm", "ppm", "--problem", "builtin:toy_bilinear", "--eta", "1", "--checks", "bogus"],
        &["run", "--algorithm", "ppm", "--problem", "builtin:toy_bilinear", "--eta", "fast"],
        &["compare", "--a", "ppm:pdhg", "--b", "pdhg", "--problem", "builtin:lasso", "--problem-b", "builtin:toy_bilinear"],
        &["frobnicate"],
    ] {
        let o = pdcert(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_pd_seed_is_config_error() {
    let o = Command::new(BIN)
        .args(["run", "--algorithm", "pdhg", "--problem", "builtin:toy_bilinear", "--eta", "auto"])
        .env("PD_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_failure_exits_one_with_first_violation() {
    // η above 1/‖A‖ leaves P indefinite; the assumption check catches it.
    let o = pdcert(&[
        "run", "--algorithm", "linearized_pdhg", "--problem", "builtin:quadratic_saddle", "--m", "3", "--n", "4",
        "--eta", "5", "--iters", "50", "--checks", "assumption",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("first_violation_k = "));
}

#[test]
fn list_counts() {
    let o = pdcert(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let count = |head: &str| {
        text.split(head).nth(1).unwrap().lines().skip(1).take_while(|l| l.starts_with("  ")).count()
    };
    assert_eq!(count("algorithms:"), 5);
    assert_eq!(count("generators"), 4);
    assert_eq!(count("checks:"), 5);
    assert!(text.contains("admm layout (y,x,λ)"));
}

#[test]
fn csv_is_deterministic_with_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = pdcert(&[
            "run", "--algorithm", "pdhg", "--problem", "builtin:quadratic_saddle", "--m", "3", "--n", "4",
            "--seed", "7", "--eta", "auto", "--iters", "120", "--csv", path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(pdcert_cli::CSV_HEADER));
    assert_eq!(lines.count(), 120);
}

#[test]
fn pd_seed_overrides_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str, env: Option<&str>| {
        let path = dir.path().join(name);
        let mut cmd = Command::new(BIN);
        cmd.args([
            "run", "--algorithm", "ppm", "--problem", "builtin:quadratic_saddle", "--m", "2", "--n", "3",
            "--seed", seed, "--eta", "1", "--iters", "5", "--csv", path.to_str().unwrap(),
        ]);
        match env {
            Some(v) => cmd.env("PD_SEED", v),
            None => cmd.env_remove("PD_SEED"),
        };
        assert_eq!(cmd.output().unwrap().status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let seed3 = run("a.csv", "3", None);
    assert_eq!(run("b.csv", "9", Some("3")), seed3);
    assert_ne!(run("c.csv", "9", None), seed3);
}

#[test]
fn report_json_has_checks() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = pdcert(&[
        "run", "--algorithm", "admm", "--problem", problems_dir().join("admm_1d.json").to_str().unwrap(),
        "--iters", "100", "--report", report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
    assert_eq!(v["certificate"]["records"].as_array().unwrap().len(), 100);
}

#[test]
fn inexact_run_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    let o = pdcert(&[
        "run", "--algorithm", "ppm", "--problem", "builtin:toy_bilinear", "--eta", "1", "--iters", "200",
        "--error-scale", "0.1", "--checks", "inexact,inclusion", "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(csv).unwrap();
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0], "200");
    let eps: f64 = last[5].parse().unwrap();
    assert!((eps - 0.1 / 200f64.powi(2)).abs() < 1e-15);
}

#[test]
fn compare_equivalence_and_difference() {
    let o = pdcert(&[
        "compare", "--a", "ppm:pdhg", "--b", "pdhg", "--problem", "builtin:quadratic_saddle", "--m", "4", "--n", "6",
        "--eta", "auto", "--iters", "200",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = pdcert(&["compare", "--a", "ppm", "--b", "pdhg", "--problem", "builtin:toy_bilinear", "--eta", "1", "--iters", "50"]);
    assert_eq!(o.status.code(), Some(1));
}
