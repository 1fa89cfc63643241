//! End-to-end runs of the `reflector` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn reflector(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reflector"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SPHERE: &str = r#"{"dim": 2, "entries": [], "default": 2.0}"#;

#[test]
fn constant_field_checks_valid() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "in.json", SPHERE);
    let out = reflector(&["check", "--in", "in.json", "--out", "o", "--level", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&dir.path().join("o/verdict.json"));
    assert_eq!(v["valid"], Value::Bool(true));
    assert!(v["max_relative_gap"].as_f64().unwrap() <= 1e-9);
    assert!(v["witness"].is_null());
}

#[test]
fn single_paraboloid_is_unbounded() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "in.json", r#"{"dim": 2, "entries": [{"axis": [0, 0, 1], "p": 1}]}"#);
    let out = reflector(&["build", "--in", "in.json", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unbounded-reflector"));
}

#[test]
fn schema_violations_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"dim": 2, "entries": [{"axis": [0, 0, 1], "p": "x"}]}"#, "entries[0].p"),
        (r#"{"dim": 2, "entries": [{"axis": [0, 1], "p": 1}]}"#, "entries[0].axis"),
        (r#"{"dim": 2, "entries": [{"axis": [0.1, 0, 1], "p": 1}]}"#, "entries[0].axis"),
        (r#"{"dim": 2, "entries": [{"axis": [0, 0, 1], "p": -1}]}"#, "entries[0].p"),
        (r#"{"dim": 2, "entries": [], "default": "none"}"#, "default"),
        (r#"{"dim": 2, "entries": [], "extra": 1}"#, "line 1"),
        ("{\"dim\": 2,\n \"entries\": [", "line 2"),
    ];
    for (text, needle) in cases {
        write(dir.path(), "in.json", text);
        let out = reflector(&["build", "--in", "in.json", "--out", "o"], dir.path());
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(2), "{text}: {err}");
        assert!(err.contains(needle), "{text}: {err}");
    }
    let out = reflector(&["build", "--in", "absent.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = reflector(&["build", "--in", "in.json", "--dim", "3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sphere_directrix_mesh_has_radius_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "in.json", SPHERE);
    let out = reflector(&["directrix", "--in", "in.json", "--out", "o", "--level", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let obj = std::fs::read_to_string(dir.path().join("o/directrix.obj")).unwrap();
    let mut vertices = 0;
    for line in obj.lines().filter(|l| l.starts_with("v ")) {
        let c: Vec<f64> = line[2..].split(' ').map(|t| t.parse().unwrap()).collect();
        assert!(((c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt() - 2.0).abs() < 1e-9);
        vertices += 1;
    }
    assert_eq!(vertices, 642);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 1280);
    let summary = read_json(&dir.path().join("o/directrix.json"));
    let res = summary["grid"]["resolution"].as_f64().unwrap();
    assert!(summary["hausdorff"].as_f64().unwrap() <= 5.0 * res * 2.0);
    assert!(dir.path().join("o/support_identity.csv").exists());
}

#[test]
fn circle_outputs_polyline_files() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "in.json", r#"{"dim": 1, "entries": [{"axis": [0, 1], "p": 1}, {"axis": [0, -1], "p": 1}]}"#);
    let out = reflector(&["build", "--in", "in.json", "--out", "o", "--level", "4"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("o/reflector.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("angle,radius"));
    assert_eq!(csv.lines().count(), 1 + 128);
    let svg = std::fs::read_to_string(dir.path().join("o/reflector.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polygon"));
}

#[test]
fn exported_field_round_trips_through_check() {
    let dir = tempfile::tempdir().unwrap();
    // The inflated side member does not touch the lens, so the field is invalid.
    write(
        dir.path(),
        "in.json",
        r#"{"dim": 2, "entries": [{"axis": [0, 0, 1], "p": 1}, {"axis": [0, 0, -1], "p": 1}, {"axis": [-1, 0, 0], "p": 3}]}"#,
    );
    let run = |args: &[&str]| assert_eq!(reflector(args, dir.path()).status.code(), Some(0));
    run(&["check", "--in", "in.json", "--out", "a", "--level", "2"]);
    run(&["build", "--in", "in.json", "--out", "b", "--level", "2"]);
    run(&["check", "--in", "b/focal.json", "--out", "c", "--level", "2"]);
    let first = std::fs::read(dir.path().join("a/verdict.json")).unwrap();
    let again = std::fs::read(dir.path().join("c/verdict.json")).unwrap();
    assert_eq!(first, again);
    assert_eq!(read_json(&dir.path().join("a/verdict.json"))["valid"], Value::Bool(false));
}

#[test]
fn closure_and_trace_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "in.json", r#"{"dim": 2, "entries": [{"axis": [0, 0, 1], "p": 1}, {"axis": [0, 0, -1], "p": 1}]}"#);
    assert_eq!(reflector(&["closure", "--in", "in.json", "--out", "o", "--level", "2"], dir.path()).status.code(), Some(0));
    assert_eq!(reflector(&["trace", "--in", "in.json", "--out", "o", "--level", "2"], dir.path()).status.code(), Some(0));
    let closed = read_json(&dir.path().join("o/closure.json"));
    assert_eq!(closed["entries"].as_array().unwrap().len(), 162);
    let gaps = std::fs::read_to_string(dir.path().join("o/gaps.csv")).unwrap();
    assert_eq!(gaps.lines().count(), 163);
    let trace = std::fs::read_to_string(dir.path().join("o/trace.csv")).unwrap();
    for row in trace.lines().skip(1) {
        let deviation: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(deviation < 1e-9);
    }
}

#[test]
fn report_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["report", "--out", out, "--level", "2", "--seed", "11"];
    let a = reflector(&args("a"), dir.path());
    assert_eq!(a.status.code(), Some(0));
    let b = Command::new(env!("CARGO_BIN_EXE_reflector"))
        .args(args("b"))
        .env("REFLECTOR_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let ra = std::fs::read(dir.path().join("a/report.json")).unwrap();
    let rb = std::fs::read(dir.path().join("b/report.json")).unwrap();
    assert_eq!(ra, rb);
    let report: Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(report["seed"], Value::from(11));
}
