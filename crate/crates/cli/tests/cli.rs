use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtn-heat")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_low_orders_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["verify-theorem", "--n", "3..5", "--seeds", "2", "--k-max", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert_eq!(v["summary"]["all_equal"], true);
    assert_eq!(v["summary"]["total"], 18);
    assert_eq!(v["config"]["command"], "verify-theorem");
    assert_eq!(v["config"]["seeds"], 2);
    assert!(v["runs"][0]["engine"].as_str().unwrap().contains(" × Γ("));
}

#[test]
fn verify_mismatch_exit_one_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["verify-theorem", "--n", "4", "--seeds", "1", "--k-max", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v = read_json(&out);
    let bad: Vec<(u64, u64)> = v["runs"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["equal"] == false)
        .map(|r| (r["n"].as_u64().unwrap(), r["k"].as_u64().unwrap()))
        .collect();
    assert_eq!(bad, vec![(4, 3)]);
}

#[test]
fn corollary_exit_zero() {
    let o = run(&["verify-corollary", "--n", "3..10", "--format", "text"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("15 runs, 15 equal"));
}

#[test]
fn coeff_ball_prints_tagged_value() {
    let o = run(&["coeff", "--n", "5", "--k", "2", "--jet", "ball", "--radius", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout), "a_2(x) = 13/4 × Γ(3)·vol(S^3)/(2π)^4\n");
    let o = run(&["coeff", "--n", "3", "--k", "0", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["coefficient"], "1");
}

#[test]
fn coeff_from_jet_file() {
    let dir = tempfile::tempdir().unwrap();
    let jet = dtn_heat::geometry::random_jet(4, 3, 9, Default::default());
    let path = dir.path().join("jet.json");
    std::fs::write(&path, dtn_heat::geometry::jet_to_json_string(&jet)).unwrap();
    let expect = dtn_heat::heat::heat_coefficient(&jet, 2).unwrap().to_string();
    let o = run(&["coeff", "--n", "4", "--k", "2", "--jet", "file", "--jet-file", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), format!("a_2(x) = {expect}"));
}

#[test]
fn trace_fit_ball_within_tolerance() {
    let o = run(&["trace-fit", "--domain", "ball", "--q", "0", "--r", "1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let a: Vec<f64> = v["fit"]["a"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((a[0] - 2.0).abs() < 1e-6 && (a[1] - 1.0).abs() < 1e-4 && (a[2] - 1.0 / 3.0).abs() < 1e-3);
    assert_eq!(v["t"].as_array().unwrap().len(), 40);
    assert_eq!(v["within_tolerance"], true);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fit.json");
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let o = run(&["trace-fit", "--domain", "ball", "--q", "0.25", "--out", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        bytes.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    let x = run(&["verify-theorem", "--n", "4", "--seeds", "2", "--k-max", "2"]);
    let y = run(&["verify-theorem", "--n", "4", "--seeds", "2", "--k-max", "2"]);
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "spectrum", "domain": "disk", "q": 2, "cutoff": 5}"#).unwrap();
    let from_file = run(&["--config", cfg.to_str().unwrap()]);
    let from_flags = run(&["spectrum", "--domain", "disk", "--q", "2", "--cutoff", "5"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, from_flags.stdout);
    let text = String::from_utf8_lossy(&from_file.stdout);
    assert!(text.starts_with("mode,lambda,multiplicity\n0,"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &[],
        &["coeff"],
        &["coeff", "--n", "3", "--k", "1", "--format", "csv"],
        &["coeff", "--n", "2", "--k", "3"],
        &["coeff", "--n", "3", "--k", "1", "--radius", "abc"],
        &["verify-theorem", "--n", "8..4"],
        &["verify-theorem", "--seeds", "0"],
        &["spectrum", "--domain", "ball", "--k", "1"],
        &["trace-fit", "--domain", "disk", "--t-min", "0.5", "--t-max", "0.1"],
        &["report", "--n", "3"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(code(&run(args)), 2, "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"command": "spectrum", "domain": "torus"}"#).unwrap();
    assert_eq!(code(&run(&["--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["--config", dir.path().join("missing.json").to_str().unwrap()])), 2);
}

#[test]
fn unwritable_output_exit_two() {
    let o = run(&["verify-corollary", "--out", "/nonexistent-dir/x/report.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_alpha_table() {
    let o = run(&["report", "--n", "4", "--no-engine"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().any(|l| l.starts_with("α5") && l.contains("-16")));
    let o = run(&["report", "--n", "4..5", "--format", "csv"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().next(), Some("n,alpha,invariant,theorem,engine"));
    assert_eq!(text.lines().count(), 27);
    assert!(text.contains("4,9,∂q/∂x_n,-1260,-1260"));
}
