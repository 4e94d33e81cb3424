use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sascomp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cutlocus_reports_eight_pi_squared() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["cutlocus", "--model", "sl2", "--c", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("cutlocus.json"));
    assert_eq!(doc["schema"], "sascomp/v1");
    let r2 = doc["summary"]["analysis"]["r2"].as_f64().unwrap();
    assert!((r2 - 8.0 * std::f64::consts::PI.powi(2)).abs() < 1e-6);
    assert!(!doc["rows"].as_array().unwrap().is_empty());
}

#[test]
fn zero_radius_volume_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["volume", "--model", "heisenberg", "--R", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = read_json(&dir.path().join("volume.json"));
    assert_eq!(doc["summary"]["closed_form"]["volume"].as_f64(), Some(0.0));
    assert_eq!(doc["summary"]["oracle"]["volume"].as_f64(), Some(0.0));
}

#[test]
fn invalid_configurations_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["volume", "--c", "-1", "--R", "1"][..],
        &["volume", "--model", "sl2", "--R", "20"],
        &["volume"],
        &["volume", "--R", "1", "--grid", "2"],
        &["heat", "--model", "su2"],
        &["riccati", "--tol", "0"],
        &["geodesic", "--alpha", "1,2"],
        &["nonsense"],
        &["volume", "--model", "torus", "--R", "1"],
    ] {
        assert_eq!(run(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn failed_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["riccati", "--model", "su2", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    let doc = read_json(&dir.path().join("riccati.json"));
    assert_eq!(doc["passed"], false);
}

#[test]
fn geodesic_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["geodesic", "--model", "sl2", "--alpha", "-1,0.5,0.2", "--steps", "10", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("geodesic.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x0,x1,x2,x3,h0,h1,h2,hamiltonian"));
    assert_eq!(lines.count(), 11);
}

#[test]
fn reports_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let o = run(dir.path(), &["compare", "--model", "su2", "--grid", "3", "--format", "csv"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| std::fs::read_to_string(d.path().join("compare.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn heat_writes_report_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["heat", "--grid", "16"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let doc = read_json(&dir.path().join("heat.json"));
    assert!(doc["summary"]["min_margin"].as_f64().unwrap() >= -1e-6);
    let field = std::fs::read_to_string(dir.path().join("heat_field.csv")).unwrap();
    assert_eq!(field.lines().count(), 16 * 16 * 16 + 1);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["selftest", "--grid", "16"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 8);
    let doc = read_json(&dir.path().join("selftest.json"));
    assert_eq!(doc["passed"], true);
}
