use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_b2quad"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const CANONICAL: &str = r#"{
  "system": "canonical_b2",
  "coefficients": {"bA": {"family": "constant", "params": {"value": 1}},
                   "bB": {"family": "constant", "params": {"value": 0}}},
  "initial": {"t0": 0, "state": [2, 3]},
  "range": {"t_end": 1, "grid": 11}
}"#;

const BOUNDARY: &str = r#"{
  "system": "deformed_canonical",
  "params": {"z": 1},
  "coefficients": {"bA": {"family": "constant", "params": {"value": 1}},
                   "bB": {"family": "constant", "params": {"value": 0}}},
  "initial": {"t0": 0, "state": [0.6931471805599453, 1]},
  "range": {"t_end": 1, "grid": 11}
}"#;

const POLAR: &str = r#"{
  "system": "bernoulli_polar",
  "params": {"n": 3},
  "coefficients": {"a1": {"family": "sinusoid", "params": {"A": 0.8, "omega": 2, "phi": 0.3, "B": 0.2}},
                   "a2": {"family": "sinusoid", "params": {"A": 0.5, "omega": 3, "phi": -0.4, "B": 0.1}}},
  "initial": {"t0": 0, "state": [1, 0.39269908169872414]},
  "range": {"t_end": 1, "grid": 200}
}"#;

#[test]
fn solve_canonical_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", CANONICAL);
    let out = run(&["solve", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x,y");
    assert_eq!(lines.len(), 12);
    let last: Vec<f64> = lines[11].split(',').map(|v| v.parse().unwrap()).collect();
    let e = std::f64::consts::E;
    assert_eq!(last[0], 1.0);
    assert!((last[1] - 2.0 * e).abs() < 1e-12 && (last[2] - 3.0 / e).abs() < 1e-12, "{last:?}");
}

#[test]
fn solve_output_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "p.json", POLAR);
    let out = dir.path().join("p.csv");
    assert_eq!(run(&["solve", "--config", s(&cfg), "--out", s(&out)]).status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut again = String::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            assert_eq!(line, "t,r,theta");
            again.push_str(line);
        } else {
            let cells: Vec<String> = line.split(',').map(|c| format!("{:.16e}", c.parse::<f64>().unwrap())).collect();
            again.push_str(&cells.join(","));
        }
        again.push('\n');
    }
    assert_eq!(again, text);
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.csv.validity.json")).unwrap()).unwrap();
    assert_eq!(side["truncated"], Value::Bool(false));
}

#[test]
fn solve_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "p.json", POLAR);
    let a = run(&["solve", "--config", s(&cfg), "--format", "json"]);
    let b = run(&["solve", "--config", s(&cfg), "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["labels"], serde_json::json!(["r", "theta"]));
    assert_eq!(v["t"].as_array().unwrap().len(), 200);
}

#[test]
fn truncated_validity_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "b.json", BOUNDARY);
    let out_path = dir.path().join("b.csv");
    let out = run(&["solve", "--config", s(&cfg), "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("validity truncated at t = 0.69314718"));
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.csv.validity.json")).unwrap()).unwrap();
    assert_eq!(side["truncated"], Value::Bool(true));
    let t = side["validity"]["boundary"]["t"].as_f64().unwrap();
    assert!((t - std::f64::consts::LN_2).abs() < 1e-12, "{t}");
    // rows stop before the boundary
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let last_t: f64 = csv.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(last_t < std::f64::consts::LN_2);
    let quiet = run(&["solve", "--config", s(&cfg), "--quiet"]);
    assert_eq!(quiet.status.code(), Some(3));
    assert!(quiet.stderr.is_empty());
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let unknown = write(&dir, "u.json", &CANONICAL.replace("canonical_b2", "no_such_system"));
    let out = run(&["solve", "--config", s(&unknown)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_system"));

    let empty_grid = write(&dir, "e.json", &POLAR.replace("\"grid\": 200", "\"grid\": 0"));
    assert_eq!(run(&["compare", "--config", s(&empty_grid)]).status.code(), Some(2));

    let missing_n = write(&dir, "n.json", &POLAR.replace("\"n\": 3", ""));
    assert_eq!(run(&["solve", "--config", s(&missing_n)]).status.code(), Some(2));

    let bad_json = write(&dir, "j.json", "{");
    assert_eq!(run(&["solve", "--config", s(&bad_json)]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "nope"]).status.code(), Some(2));
}

#[test]
fn compare_polar_against_rk45() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "p.json", POLAR);
    let out = run(&["compare", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["max_error_overall"].as_f64().unwrap() <= 1e-6, "{v}");
    assert_eq!(v["grid"], 200);
    assert!(v["max_error"]["theta"].is_number());
    assert_eq!(v["tolerances"]["ode_rel"].as_f64(), Some(1e-10));
}

#[test]
fn verify_scopes() {
    let out = run(&["verify", "canonical_b2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);

    let all = run(&["verify"]);
    assert_eq!(all.status.code(), Some(0));
    let text = String::from_utf8(all.stdout).unwrap();
    assert!(text.contains("PASS") && !text.contains("FAIL"));

    let bad = run(&["verify", "--corrupt-jacobian"]);
    assert_ne!(bad.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn order_scan_defaults() {
    let out = run(&["order-scan"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for k in 1..=3 {
        let slope = v["slopes"][k.to_string()].as_f64().unwrap();
        assert!((slope - (k as f64 + 1.0)).abs() <= 0.2, "k={k}: {slope}");
    }
}

#[test]
fn order_scan_from_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "s.json", r#"{"k": [2], "z": [0.01, 0.02, 0.04], "range": {"t_end": 0.5, "grid": 21}}"#);
    let out = run(&["order-scan", "--config", s(&cfg), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("k,z,max_error"));
    assert_eq!(text.lines().count(), 4);
    let bad = write(&dir, "b.json", r#"{"z": [0.01, 0.02]}"#);
    assert_eq!(run(&["order-scan", "--config", s(&bad)]).status.code(), Some(2));
}

#[test]
fn list_systems_json() {
    let out = run(&["list-systems", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let list = v.as_array().unwrap();
    assert_eq!(list.len(), 17);
    let polar = list.iter().find(|s| s["id"] == "bernoulli_polar").unwrap();
    assert_eq!(polar["params"], serde_json::json!(["n"]));
    assert_eq!(polar["coefficients"], serde_json::json!(["a1", "a2"]));
}
