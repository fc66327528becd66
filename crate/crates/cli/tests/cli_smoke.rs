use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bootbias_cli::commands::report_checks;
use bootbias_cli::emit::{parse_summary_csv, CSV_HEADER};
use bootbias_cli::selftest::run_checks_with;
use serde_json::{json, Value};

fn bootbias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bootbias"))
        .args(args)
        .env_remove("BOOTBIAS_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_in(dir: &Path, cfg: &Value) -> Output {
    let path = write_config(dir, "config.json", cfg);
    bootbias(&["run", &path, "--out-dir", dir.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn minimal_risk() -> Value {
    json!({
        "experiment": "risk",
        "model": {"type": "gaussian_shift"},
        "functional": {"type": "quadratic_form"},
        "k": 1,
        "grid": {"n": [100], "d": 3},
        "mc": {"M": 20, "R": 200},
        "seed": 1,
        "outputs": {"csv": "out.csv", "json": "out.json", "timing": false}
    })
}

#[test]
fn minimal_risk_config_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &minimal_risk());
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("n=100 ")).count(), 1);

    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
    let row = &parse_summary_csv(&csv).unwrap()[0];
    let mirrored = &json["summaries"][0];
    assert_eq!(mirrored["rmse"].as_f64().unwrap().to_bits(), row.rmse().to_bits());
    assert_eq!(mirrored["bias"].as_f64().unwrap().to_bits(), row.values[0].to_bits());
    assert_eq!(json["config"]["experiment"], "risk");
}

#[test]
fn sweep_with_five_sizes_writes_increasing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = minimal_risk();
    cfg["experiment"] = json!("sweep");
    cfg["grid"] = json!({"n": [50, 100, 200, 400, 800], "alpha": 0.4});
    cfg["mc"] = json!({"M": 10, "R": 100});
    cfg["outputs"]["svg"] = json!("rate.svg");
    let out = run_in(dir.path(), &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = parse_summary_csv(&fs::read_to_string(dir.path().join("out.csv")).unwrap()).unwrap();
    let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    assert_eq!(ns, vec![50, 100, 200, 400, 800]);
    let svg = fs::read_to_string(dir.path().join("rate.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn threads_flag_and_environment_give_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.json", &minimal_risk());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = bootbias(&["run", &path, "--out-dir", a.to_str().unwrap(), "--threads", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = Command::new(env!("CARGO_BIN_EXE_bootbias"))
        .args(["run", &path, "--out-dir", b.to_str().unwrap()])
        .env("BOOTBIAS_THREADS", "3")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        fs::read(a.join("out.csv")).unwrap(),
        fs::read(b.join("out.csv")).unwrap()
    );
}

#[test]
fn oracle_check_prints_a_pass_fail_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "oracle-check",
        "model": {"type": "gaussian_shift"},
        "functional": {"type": "exp_linear", "u": [1.0]},
        "theta": "zero",
        "k": 1,
        "grid": {"n": [1], "d": 1},
        "mc": {"M": 20, "R": 20000},
        "seed": 3,
        "outputs": {"csv": "oracle.csv", "json": "oracle.json", "timing": false}
    });
    let out = run_in(dir.path(), &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let header = stdout.lines().find(|l| l.trim_end().ends_with("result")).expect("table header");
    assert!(header.contains("oracle"));
    assert_eq!(stdout.lines().filter(|l| l.trim_end().ends_with("pass")).count(), 2);
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("oracle.json")).unwrap()).unwrap();
    assert_eq!(json["oracle"].as_array().unwrap().len(), 2);
    assert!((json["oracle"][0]["oracle"].as_f64().unwrap() - 0.5f64.exp_m1()).abs() < 1e-15);
}

#[test]
fn clt_run_writes_its_own_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "clt",
        "model": {"type": "independent_components", "noise": "rademacher"},
        "functional": {"type": "linear"},
        "grid": {"n": [10, 40], "d": 2},
        "options": {"projection": "e1", "clt_samples": 500},
        "outputs": {"csv": "clt.csv"}
    });
    let out = run_in(dir.path(), &cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("clt.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("n,d,samples,w1,w2,"));
}

fn write_csv(dir: &Path, rows: &[(usize, f64)]) -> String {
    let mut text = format!("{CSV_HEADER}\n");
    for (n, rmse) in rows {
        text.push_str(&format!("{n},3,1,0.0,0.0,{rmse},{rmse},1.0,1.0,0.1,0,0.0\n"));
    }
    let path = dir.join("in.csv");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn report_draws_one_polyline_for_two_points() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), &[(100, 0.2), (400, 0.1)]);
    let svg = dir.path().join("r.svg");
    let out = bootbias(&["report", &csv, "--svg", svg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 1);
    assert!(text.contains(">slope "));
}

#[test]
fn report_on_exact_root_n_rate_labels_minus_half() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<(usize, f64)> = [250, 500, 1000, 2000, 4000]
        .iter()
        .map(|&n| (n, 1.7 / (n as f64).sqrt()))
        .collect();
    let csv = write_csv(dir.path(), &rows);
    let svg = dir.path().join("r.svg");
    let out = bootbias(&["report", &csv, "--svg", svg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let first = fs::read_to_string(&svg).unwrap();
    assert!(first.contains(">slope -0.50<"));
    assert!(bootbias(&["report", &csv, "--svg", svg.to_str().unwrap()]).status.success());
    assert_eq!(fs::read_to_string(&svg).unwrap(), first);
}

#[test]
fn report_without_rows_fails_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), &[]);
    let svg = dir.path().join("r.svg");
    let out = bootbias(&["report", &csv, "--svg", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!svg.exists());

    fs::write(dir.path().join("bad.csv"), "n,rmse\n1,2\n").unwrap();
    let bad = dir.path().join("bad.csv");
    let out = bootbias(&["report", bad.to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("malformed"));
    assert!(!svg.exists());

    let missing = dir.path().join("missing.csv");
    let out = bootbias(&["report", missing.to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn selftest_passes_and_lists_checks() {
    let out = bootbias(&["selftest"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    for name in ["binomial table", "collapsed weights", "pauli orthonormality", "normal cdf accuracy", "wasserstein axioms"] {
        assert!(stdout.contains(&format!("PASS  {name}")), "{stdout}");
    }
}

#[test]
fn selftest_fails_with_corrupted_binomials() {
    let corrupt = |n: u32, k: u32| if n == 5 && k == 2 { 11 } else { bootbias::bootstrap::binomial(n, k) };
    let checks = run_checks_with(&corrupt);
    let mut console = Vec::new();
    let err = report_checks(&checks, &mut console).unwrap_err();
    assert_ne!(err.exit_code(), 0);
    let text = String::from_utf8(console).unwrap();
    assert!(text.contains("FAIL  binomial table"), "{text}");
}

#[test]
fn unknown_keys_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = minimal_risk();
    cfg["mc"]["B"] = json!(10);
    let out = run_in(dir.path(), &cfg);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("mc") && err.contains('B'), "{err}");
    assert!(!dir.path().join("out.csv").exists());
}

#[test]
fn invalid_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("grid", json!({"n": [200, 100], "d": 3}), "grid.n"),
        ("k", json!(13), "k"),
        ("delta", json!(-0.5), "delta"),
        ("experiment", json!("nonsense"), "nonsense"),
        ("model", json!({"type": "gaussian_shift", "sigmaa": 1.0}), "sigmaa"),
    ];
    for (key, value, needle) in cases {
        let mut cfg = minimal_risk();
        cfg[key] = value;
        let out = run_in(dir.path(), &cfg);
        assert_eq!(out.status.code(), Some(2), "{key}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "{key}: {}", stderr(&out));
    }
}

#[test]
fn failed_grid_point_exits_with_experiment_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "risk",
        "model": {"type": "exponential_family", "family": "poisson_product"},
        "functional": {"type": "linear"},
        "theta": {"constant": 25.0},
        "grid": {"n": [10000000], "d": 1},
        "mc": {"M": 2, "R": 20},
        "outputs": {"csv": "out.csv", "timing": false}
    });
    let out = run_in(dir.path(), &cfg);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAILED"));
}
