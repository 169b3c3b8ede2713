use std::path::Path;
use std::process::Command;

use germnorm::interchange::{series_to_json, VectorFieldDoc};
use germnorm::planar::VectorField2;
use germnorm::Series;
use serde_json::Value;

fn run(dir: &Path, args: &[&str], input: &str) -> (i32, String, String) {
    let path = dir.join("in.json");
    std::fs::write(&path, input).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_germnorm")).args(args).arg("--input").arg(&path).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn saddle_node() -> String {
    let x = VectorField2::from_fracs(8, &[(&[1, 0], 1, 1)], &[(&[0, 2], 1, 1)]).unwrap();
    serde_json::to_string(&VectorFieldDoc::from(&x)).unwrap()
}

#[test]
fn prepare_function_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let f = Series::from_fracs(2, 10, &[(&[0, 2], 1, 1), (&[1, 2], 1, 1)]);
    let (code, cert, err) = run(dir.path(), &["--command", "prepare-function"], &series_to_json(&f));
    assert_eq!(code, 0, "{}", err);
    let doc: Value = serde_json::from_str(&cert).unwrap();
    assert_eq!(doc["command"], "prepare-function");
    assert_eq!(doc["trunc"], 10);
    let (code, report, err) = run(dir.path(), &["--command", "verify"], &cert);
    assert_eq!(code, 0, "{}", err);
    let report: Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["verified"], "prepare-function");
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let (code, stdout, _) =
        run(dir.path(), &["--command", "normalize-vf", "--output", target.to_str().unwrap()], &saddle_node());
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(doc["normal_form"]["tag"], "saddle-node");
}

#[test]
fn tampered_certificate_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cert, _) = run(dir.path(), &["--command", "normalize-vf"], &saddle_node());
    let mut doc: Value = serde_json::from_str(&cert).unwrap();
    doc["trunc"] = Value::from(7);
    let (code, _, err) = run(dir.path(), &["--command", "verify"], &doc.to_string());
    assert_eq!(code, 4, "{}", err);
    let mut doc: Value = serde_json::from_str(&cert).unwrap();
    doc["input"]["px"]["terms"][0]["re"] = Value::from("2/1");
    let (code, _, err) = run(dir.path(), &["--command", "verify"], &doc.to_string());
    assert_eq!(code, 4);
    assert!(err.contains("hash"), "{}", err);
}

#[test]
fn parse_and_usage_errors_exit_5() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["--command", "prepare-function"], "{not json").0, 5);
    assert_eq!(run(dir.path(), &["--command", "no-such-command"], "{}").0, 5);
    let f = Series::from_fracs(2, 6, &[(&[0, 2], 1, 1)]);
    assert_eq!(run(dir.path(), &["--command", "prepare-function", "--trunc", "9"], &series_to_json(&f)).0, 5);
    assert_eq!(run(dir.path(), &["--bogus"], "{}").0, 5);
}

#[test]
fn real_flag_rejects_complex_input() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"nvars":2,"trunc":6,"terms":[{"exp":[0,2],"re":"1/1","im":"1/1"}]}"#;
    assert_eq!(run(dir.path(), &["--command", "prepare-function", "--real"], text).0, 2);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(dir.path(), &["--command", "refine-vf"], &saddle_node());
    let b = run(dir.path(), &["--command", "refine-vf"], &saddle_node());
    assert_eq!(a.0, 0, "{}", a.2);
    assert_eq!(a.1, b.1);
}
