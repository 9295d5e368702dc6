use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn curvnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvnorm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

#[test]
fn identities_succeed_with_passing_checks() {
    let out = curvnorm(&["identities", "--seed", "3"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&out);
    assert_eq!(r["passed"], Value::Bool(true));
    assert_eq!(r["config"]["command"], "identities");
    assert_eq!(r["config"]["seed"], 3);
    assert!(r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.json",
        r#"{"command": "pinching", "trials": 20000, "seed": 11}"#,
    );
    let first = curvnorm(&["run", "--config", &cfg]);
    let second = curvnorm(&["run", "--config", &cfg, "--timing"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8_lossy(&second.stderr).contains(" s"));
}

#[test]
fn report_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = curvnorm(&["gauss-bonnet"]);
    assert_eq!(out.status.code(), Some(0));
    let echoed = report(&out)["config"].to_string();
    let cfg = write_config(dir.path(), "echo.json", &echoed);
    let again = curvnorm(&["run", "--config", &cfg]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn unknown_config_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"command": "ricci-ode", "bogus": 1}"#,
    );
    let out = curvnorm(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "broken.json", "{\"command\": ");
    assert_eq!(curvnorm(&["run", "--config", &cfg]).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "u.json", r#"{"command": "nope"}"#);
    assert_eq!(
        curvnorm(&["run", "--config", &unknown]).status.code(),
        Some(2)
    );
    let conflict = write_config(dir.path(), "c.json", r#"{"command": "bubble"}"#);
    assert_eq!(
        curvnorm(&["quotient", "--config", &conflict]).status.code(),
        Some(2)
    );
    assert_eq!(curvnorm(&["run"]).status.code(), Some(2));
    assert_eq!(curvnorm(&["no-such-subcommand"]).status.code(), Some(2));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = curvnorm(&["run", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_invariant_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "coarse.json",
        r#"{"command": "ricci-ode", "dt": 1.0}"#,
    );
    let out_path = dir.path().join("report.json");
    let out = curvnorm(&["run", "--config", &cfg, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("volume drift"));
    let r: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["passed"], Value::Bool(false));
}

#[test]
fn computation_errors_exit_with_five() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "n3.json",
        r#"{"command": "identities", "n": 3}"#,
    );
    assert_eq!(curvnorm(&["run", "--config", &cfg]).status.code(), Some(5));
}

#[test]
fn csv_output_has_header_and_numeric_rows() {
    let out = curvnorm(&["ricci-ode", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["t", "a", "b", "int_s2", "int_ric2", "volume"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2001);
    let first: Vec<f64> = rows[0].iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, [0.0, 1.0, 2.0, 18.0, 5.0, 2.0]);
}

#[test]
fn report_carries_schema_version_and_ledger() {
    let out = curvnorm(&["bubble"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["csv_schema_version"], 1);
    let ids: Vec<&str> = r["ledger"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    assert!(ids.contains(&"bubble-scalar-curvature"));
}
