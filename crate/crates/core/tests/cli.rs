//! The binary end to end: exit codes, formats, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bubblekit")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

const LEVERAGE: &str = r#"
model = "leverage"
[params]
beta = 0.96
pi = 0.25
lambda = 4.0
delta = 0.1
G = 1.02
D = 0.01
production = { tfp = 1.0, technology = { kind = "cobb_douglas", alpha = 0.3333333333333333 } }
"#;

#[test]
fn golden_scenarios_succeed() {
    for (cmd, file) in [
        ("steady", "samuelson_steady.toml"),
        ("determinacy", "tirole_determinacy.toml"),
        ("verify", "leverage_verify.toml"),
        ("steady", "kocherlakota_steady.toml"),
        ("verify", "reduced_form_custom_verify.toml"),
    ] {
        let out = run(&[cmd, "--config", scenario(file).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{file}: {}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["tool"], "bubblekit");
    }
}

#[test]
fn leverage_at_one_is_config_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", LEVERAGE);
    let out = run(&["determinacy", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("< 1"), "{err}");
}

#[test]
fn empty_grid_is_config_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let body = std::fs::read_to_string(scenario("samuelson_sweep_gd.toml")).unwrap().replace("stop = 1.3", "stop = 0.5");
    let cfg = write(dir.path(), "empty.toml", &body);
    assert_eq!(run(&["sweep", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn unknown_key_is_config_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let body = std::fs::read_to_string(scenario("samuelson_steady.toml")).unwrap() + "\nsurprise = 1\n";
    let cfg = write(dir.path(), "extra.toml", &body);
    assert_eq!(run(&["steady", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn missing_config_is_config_invalid() {
    assert_eq!(run(&["steady", "--config", "/nonexistent/scenario.toml"]).status.code(), Some(2));
}

#[test]
fn impossible_tolerance_fails_verification() {
    let cfg = scenario("samuelson_verify.toml");
    let out = run(&["verify", "--config", cfg.to_str().unwrap(), "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("verification failed"));
}

#[test]
fn csv_path_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("path.csv");
    let plot = dir.path().join("path.gp");
    let cfg = scenario("samuelson_verify.toml");
    let out = run(&[
        "path", "--config", cfg.to_str().unwrap(), "--format", "csv", "--out", csv.to_str().unwrap(),
        "--plot-script", plot.to_str().unwrap(), "--horizon", "120",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("t,x0,x1"));
    assert_eq!(lines.count(), 121);
    assert!(std::fs::read_to_string(&plot).unwrap().contains("path.csv"));
}

#[test]
fn plot_script_needs_csv() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("p.gp");
    let cfg = scenario("samuelson_steady.toml");
    let out = run(&["steady", "--config", cfg.to_str().unwrap(), "--plot-script", plot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_is_deterministic_and_ordered() {
    let cfg = scenario("samuelson_sweep_gd.toml");
    let a = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    let b = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let rows = v["sweep"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 13);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r["index"], i);
    }
}
