//! End-to-end command behavior: outputs, exit codes, and report stability.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lpuhf"))
}

fn write_input(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("lpuhf-cli-test-{name}"));
    fs::write(&path, contents).unwrap();
    path
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).unwrap()
}

fn corner23() -> PathBuf {
    write_input(
        "corner23.json",
        r#"{"d": 2, "diagonal": true, "index": [
            {"label": "c00", "f": 0.25, "s": [[[1,0],[0,0]],[[0,0],[1,0]]]},
            {"label": "c01", "f": 0.25, "s": [[[3,0],[0,0]],[[0,0],[1,0]]]},
            {"label": "c10", "f": 0.25, "s": [[[1,0],[0,0]],[[0,0],[3,0]]]},
            {"label": "c11", "f": 0.25, "s": [[[3,0],[0,0]],[[0,0],[3,0]]]}
        ]}"#,
    )
}

fn basic2() -> PathBuf {
    write_input(
        "basic2.json",
        r#"{"d": 2, "diagonal": true, "index": [
            {"label": "1", "f": 1.0, "s": [[[1,0],[0,0]],[[0,0],[1,0]]]}
        ]}"#,
    )
}

#[test]
fn norm_of_offdiagonal_unit_under_corners() {
    let element = write_input("e12.json", "[[[0,0],[1,0]],[[0,0],[0,0]]]");
    let output = bin()
        .args(["norm"])
        .arg(corner23())
        .arg(element)
        .args(["--p", "2"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let value = stdout_json(&output);
    assert_eq!(value["lower"], serde_json::json!(3.0));
    assert_eq!(value["upper"], serde_json::json!(3.0));
}

#[test]
fn norm_of_identity_under_basic_system() {
    let element = write_input("id2.json", "[[[1,0],[0,0]],[[0,0],[1,0]]]");
    let output = bin()
        .args(["norm"])
        .arg(basic2())
        .arg(element)
        .args(["--p", "3/2"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let value = stdout_json(&output);
    assert_eq!(value["lower"], serde_json::json!(1.0));
    assert_eq!(value["upper"], serde_json::json!(1.0));
}

#[test]
fn capacity_cap_exits_3() {
    let element = write_input("e12cap.json", "[[[0,0],[1,0]],[[0,0],[0,0]]]");
    let output = bin()
        .env("LPUHF_MAX_DIM", "1")
        .args(["norm"])
        .arg(corner23())
        .arg(element)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));

    let spec = write_input(
        "deep-spec.json",
        &format!(
            r#"{{"p": 2.0, "stages": [{}]}}"#,
            vec![r#"{"d": 2, "system": {"family": "gamma_corner", "gamma": 2.0}}"#; 13].join(", ")
        ),
    );
    let output = bin().args(["flip"]).arg(spec).args(["--n", "13"]).output().unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn malformed_input_exits_2() {
    let bad = write_input("bad.json", "{not json");
    let element = write_input("e12bad.json", "[[[0,0],[1,0]],[[0,0],[0,0]]]");
    let output = bin().args(["norm"]).arg(bad).arg(element).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!output.stderr.is_empty());
}

#[test]
fn classify_family_verdicts() {
    let convergent = write_input("power-a2.json", r#"{"family": "power", "c": 1.0, "a": 2.0}"#);
    let output = bin()
        .args(["classify"])
        .arg(convergent)
        .args(["--p", "2", "--n", "10"])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(stdout_json(&output)["verdict"], serde_json::json!("CONVERGENT_SPATIAL"));

    let divergent = write_input("power-a1.json", r#"{"family": "power", "c": 1.0, "a": 1.0}"#);
    let output = bin().args(["classify"]).arg(divergent).output().unwrap();
    assert!(output.status.success());
    assert_eq!(
        stdout_json(&output)["verdict"],
        serde_json::json!("DIVERGENT_NONAMENABLE")
    );

    let stages = write_input(
        "five-stages.json",
        r#"{"p": 2.0, "stages": [
            {"d": 2, "system": {"family": "gamma_corner", "gamma": 2.0}},
            {"d": 2, "system": {"family": "gamma_corner", "gamma": 2.0}},
            {"d": 2, "system": {"family": "gamma_corner", "gamma": 2.0}},
            {"d": 2, "system": {"family": "gamma_corner", "gamma": 2.0}},
            {"d": 2, "system": {"family": "gamma_corner", "gamma": 2.0}}
        ]}"#,
    );
    let output = bin().args(["classify"]).arg(stages).output().unwrap();
    assert!(output.status.success());
    let value = stdout_json(&output);
    assert_eq!(value["verdict"], serde_json::json!("UNDETERMINED"));
    assert_eq!(value["terms"].as_array().unwrap().len(), 5);

    let unknown = write_input("zeta.json", r#"{"family": "zeta", "c": 1.0}"#);
    let output = bin().args(["classify"]).arg(unknown).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn validate_reports_violations() {
    let output = bin().args(["system", "validate"]).arg(basic2()).output().unwrap();
    assert!(output.status.success());
    assert_eq!(stdout_json(&output)["valid"], serde_json::json!(true));

    let no_identity = write_input(
        "no-identity.json",
        r#"{"d": 2, "diagonal": true, "index": [
            {"label": "w", "f": 1.0, "s": [[[2,0],[0,0]],[[0,0],[1,0]]]}
        ]}"#,
    );
    let output = bin().args(["system", "validate"]).arg(no_identity).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let value = stdout_json(&output);
    assert_eq!(value["valid"], serde_json::json!(false));
    assert!(value["violations"].as_array().unwrap().iter().any(|v| v
        .as_str()
        .unwrap()
        .contains("ONE")));
}

#[test]
fn spatial_check_rejects_with_named_violation() {
    let system = write_input(
        "sim12.json",
        r#"{"d": 2, "diagonal": true, "index": [
            {"label": "1", "f": 0.5, "s": [[[1,0],[0,0]],[[0,0],[1,0]]]},
            {"label": "w", "f": 0.5, "s": [[[1,0],[0,0]],[[0,0],[2,0]]]}
        ]}"#,
    );
    let output = bin()
        .args(["spatial-check"])
        .arg(system)
        .args(["--p", "3"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let value = stdout_json(&output);
    assert_eq!(value["spatial"], serde_json::json!(false));
    assert!(value["reason"].as_str().unwrap().contains("modulus"));
}

#[test]
fn verify_flip_suite_passes() {
    let output = bin().args(["verify", "--suite", "flip"]).output().unwrap();
    assert!(output.status.success());
    let value = stdout_json(&output);
    assert_eq!(value["summary"]["fail"], serde_json::json!(0));
    assert!(value["summary"]["pass"].as_u64().unwrap() > 0);
    for check in value["checks"].as_array().unwrap() {
        assert!(!check["paper_ref"].as_str().unwrap().is_empty());
    }
}

#[test]
fn verify_none_is_empty_success() {
    let output = bin().args(["verify", "--suite", "none"]).output().unwrap();
    assert!(output.status.success());
    let value = stdout_json(&output);
    assert_eq!(value["checks"].as_array().unwrap().len(), 0);

    let output = bin().args(["verify", "--suite", "nonsense"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn verify_reports_are_byte_stable_and_seed_invariant() {
    let out_a = std::env::temp_dir().join("lpuhf-cli-test-report-a.json");
    let out_b = std::env::temp_dir().join("lpuhf-cli-test-report-b.json");
    for out in [&out_a, &out_b] {
        let output = bin()
            .args(["verify", "--suite", "series", "--seed", "5", "--out"])
            .arg(out)
            .output()
            .unwrap();
        assert!(output.status.success());
    }
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());

    let pattern = |seed: &str| {
        let output = bin()
            .args(["verify", "--suite", "sign-selection", "--seed", seed])
            .output()
            .unwrap();
        assert!(output.status.success());
        stdout_json(&output)["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| (c["id"].as_str().unwrap().to_string(), c["status"].as_str().unwrap().to_string()))
            .collect::<Vec<_>>()
    };
    assert_eq!(pattern("1"), pattern("2"));
}
