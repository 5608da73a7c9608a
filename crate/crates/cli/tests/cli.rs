use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rbmq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbmq")).args(args).env("RBMQ_THREADS", "2").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

const STANDARD: &str = r#"{"sigma": [[1, 0], [0, 1]], "mu": [-1, -1]}"#;

#[test]
fn analyze_standard_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", STANDARD);
    let v = json(&rbmq(&["analyze", &cfg]));
    assert_eq!(v["derived"]["beta"].as_f64().unwrap(), std::f64::consts::FRAC_PI_2);
    assert_eq!(v["group"]["finite"], true);
    assert_eq!(v["group"]["order"], 4);
    assert_eq!(v["regime"], "pole_dominant");
    assert_eq!(v["theta1_at_branch_point_sign"], 1);
}

#[test]
fn analyze_output_round_trips_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", r#"{"sigma": [[1.3, -0.41], [-0.41, 0.7]], "mu": [-0.123456789012345, -2.5e-3]}"#);
    let first = rbmq(&["analyze", &cfg]);
    let again = write(dir.path(), "again.json", std::str::from_utf8(&first.stdout).unwrap());
    let second = rbmq(&["analyze", &again]);
    assert_eq!(json(&first), json(&second));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn eval_phi_on_standard_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", STANDARD);
    let v = json(&rbmq(&["eval", &cfg, "--fn", "phi", "--re1", "-2", "--re2", "-2"]));
    let re = v["value"]["re"].as_f64().unwrap();
    assert!((re - 0.25).abs() < 1e-14, "{re}");
    assert_eq!(v["value"]["im"].as_f64().unwrap(), 0.0);
}

#[test]
fn check_on_random_model_passes() {
    let o = rbmq(&["check", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() >= 10);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn invalid_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let not_pd = write(dir.path(), "a.json", r#"{"sigma": [[1, 2], [2, 1]], "mu": [-1, -1]}"#);
    let drift = write(dir.path(), "b.json", r#"{"sigma": [[1, 0], [0, 1]], "mu": [1, -1]}"#);
    let garbage = write(dir.path(), "c.json", "{ sigma");
    for cfg in [not_pd, drift, garbage] {
        let o = rbmq(&["analyze", &cfg]);
        assert_eq!(o.status.code(), Some(2), "{cfg}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(rbmq(&["analyze", "/nonexistent/model.json"]).status.code(), Some(2));
}

#[test]
fn evaluation_at_a_pole_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", STANDARD);
    let o = rbmq(&["eval", &cfg, "--fn", "phi1", "--re", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pole"));
}

#[test]
fn invert_writes_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", STANDARD);
    let out = dir.path().join("nu1.csv");
    let o = rbmq(&["invert", &cfg, "--min", "0.5", "--max", "3", "--points", "6", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,density,method"));
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        let (x, d): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        // ν1 of the standard model is 2 e^{-2x}
        assert!((d - 2.0 * (-2.0 * x).exp()).abs() < 1e-8, "{l}");
    }
}

#[test]
fn asympt_reports_regime_and_tail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", r#"{"sigma": [[1, 0.3], [0.3, 1]], "mu": [-0.2, -1.5]}"#);
    let v = json(&rbmq(&["asympt", &cfg, "--x", "5,20"]));
    assert!(v["regime"].is_string());
    assert!(v["decay_rate"].as_f64().unwrap() > 0.0);
    assert_eq!(v["tail"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_emits_long_format_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", STANDARD);
    let o = rbmq(&["simulate", &cfg, "--horizon", "50", "--burn-in", "5", "--batches", "5", "--step", "0.01", "--seed", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("section,a,b,value,stderr"));
    assert!(text.lines().count() > 9);
}

#[test]
fn non_identity_reflection_is_refused_for_transforms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", r#"{"sigma": [[1, 0], [0, 1]], "mu": [-1, -1], "r": [[1, 0.2], [0.1, 1]]}"#);
    let v = json(&rbmq(&["analyze", &cfg]));
    assert_eq!(v["identity_reflection"], false);
    assert!(v["regime"].is_null());
    assert_eq!(rbmq(&["eval", &cfg, "--fn", "phi1", "--re", "-1"]).status.code(), Some(3));
}
