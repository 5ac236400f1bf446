//! End-to-end tests of the `qsd-lab` binary: exit codes, error reports,
//! artifact generation, and schema conformance of every emitted JSON kind.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_qsd-lab")
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(binary()).args(args).output().expect("binary runs")
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run_and_validate(dir: &Path, name: &str, body: &str, schema: &str) -> Value {
    let scenario = write_scenario(dir, &format!("{name}.json"), body);
    let prefix = dir.join(name).to_string_lossy().into_owned();
    let out = run(&[scenario.to_str().unwrap(), "--out", &prefix, "--threads", "2"]);
    assert!(
        out.status.success(),
        "{name} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!out.stdout.is_empty(), "{name} printed no summary");
    let json: Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{prefix}.json")).unwrap()).unwrap();
    common::assert_valid(repo_file(&format!("schemas/{schema}.schema.json")).to_str().unwrap(), &json);
    let csv = std::fs::read_to_string(format!("{prefix}.csv")).unwrap();
    assert!(csv.lines().count() >= 2, "{name} CSV has no data rows");
    json
}

#[test]
fn every_output_kind_validates_against_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();

    let zero = r#"{"dim": 2, "entries": [1,0, 0,0, 0,0, 0,0]}"#;
    let plus = r#"{"dim": 2, "entries": [0.5,0, 0.5,0, 0.5,0, 0.5,0]}"#;

    run_and_validate(
        dir,
        "hellstrom",
        &format!(
            r#"{{"kind": "hellstrom", "out_prefix": "x", "p1": 0.5, "state1": {zero}, "p2": 0.5, "state2": {plus}}}"#
        ),
        "hellstrom_output",
    );

    run_and_validate(
        dir,
        "bounds",
        &format!(
            r#"{{"kind": "bounds", "out_prefix": "x", "ensemble": {{"members": [
                {{"weight": 0.5, "state": {zero}}}, {{"weight": 0.5, "state": {plus}}}]}}}}"#
        ),
        "bounds_output",
    );

    let sweep = run_and_validate(
        dir,
        "urm-sweep",
        r#"{"kind": "urm-sweep", "out_prefix": "x",
            "model": {"kind": "qubit-example", "x1": 0.0, "x2": 1.0},
            "grid": {"start": 0.0, "stop": 31.41592653589793, "points": 201},
            "quantity": "hellstrom",
            "verdict": {"threshold": 0.1, "window": [0.0, 31.41592653589793]}}"#,
        "urm_sweep_output",
    );
    assert_eq!(
        sweep["report"]["verdict"]["verdict"],
        "not-fully-solvable-evidence"
    );

    run_and_validate(
        dir,
        "chernoff",
        &format!(
            r#"{{"kind": "chernoff", "out_prefix": "x", "ensemble": {{"members": [
                {{"weight": 0.5, "state": {zero}}}, {{"weight": 0.5, "state": {plus}}}]}}}}"#
        ),
        "chernoff_output",
    );

    run_and_validate(
        dir,
        "tensor-power",
        r#"{"kind": "tensor-power", "out_prefix": "x",
            "p1": 0.5, "psi1": [1,0, 0,0],
            "p2": 0.5, "psi2": [0.7071067811865476,0, 0.7071067811865476,0],
            "n_max": 8, "explicit_n_cap": 4}"#,
        "tensor_power_output",
    );

    run_and_validate(
        dir,
        "nmixture",
        r#"{"kind": "nmixture", "out_prefix": "x",
            "model": {"dim": 32, "interval": [0.0, 1.0], "profile": "uniform"},
            "density": {"kind": "uniform", "a": 0.0, "b": 1.0},
            "partition": [[0.0, 0.5], [0.5, 1.0]],
            "nodes_per_component": 32,
            "times": [0.0, 5.0]}"#,
        "nmixture_output",
    );

    let claim13 = run_and_validate(
        dir,
        "claim13",
        r#"{"kind": "claim13", "out_prefix": "x",
            "model": {"dim": 64, "interval": [0.0, 1.0], "profile": "uniform"},
            "c": 50.0, "eps1": 0.05, "eps2": 0.01,
            "nodes_per_component": 48, "t_search": 10.0, "fidelity_samples": 1}"#,
        "claim13_output",
    );
    assert_eq!(claim13["report"]["pass"], true);

    run_and_validate(
        dir,
        "truncation",
        r#"{"kind": "truncation", "out_prefix": "x", "seed": 7,
            "dim": 10, "ranks": [2, 5, 10], "study": "kb"}"#,
        "truncation_output",
    );

    run_and_validate(
        dir,
        "inequality-suite",
        r#"{"kind": "inequality-suite", "out_prefix": "x", "seed": 4, "trials": 6}"#,
        "inequality_suite_output",
    );
}

#[test]
fn shipped_scenarios_parse_and_match_the_input_schema() {
    let schema_path = repo_file("schemas/scenario.schema.json");
    let dir = repo_file("scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let raw = std::fs::read_to_string(&path).unwrap();
        let value: Value = serde_json::from_str(&raw).unwrap();
        common::assert_valid(schema_path.to_str().unwrap(), &value);
        let scenario: qsd_lab::scenario::Scenario = serde_json::from_str(&raw)
            .unwrap_or_else(|e| panic!("{} does not parse: {e}", path.display()));
        scenario.validate().unwrap_or_else(|e| panic!("{} invalid: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 12, "expected the shipped scenario set, found {seen}");
}

#[test]
fn exit_codes_and_error_reports() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();

    // Malformed JSON: exit 2 with line/column.
    let path = write_scenario(dir, "broken.json", "{\"kind\": \"bounds\",\n  ");
    let out = run(&[path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["error"], "ParseError");
    assert!(report["line"].is_u64() && report["column"].is_u64());

    // Missing file: exit 2.
    let out = run(&[dir.join("absent.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // Well-formed JSON, unknown kind: exit 3.
    let path = write_scenario(dir, "unknown.json", r#"{"kind": "mystery", "out_prefix": "x"}"#);
    let out = run(&[path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let report: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["error"], "ValidationError");

    // Parameters rejected by validation: exit 3.
    let path = write_scenario(
        dir,
        "invalid.json",
        r#"{"kind": "urm-sweep", "out_prefix": "x",
            "model": {"kind": "qubit-example", "x1": 1.0, "x2": 1.0},
            "grid": {"start": 0.0, "stop": 1.0, "points": 11},
            "quantity": "hellstrom"}"#,
    );
    let out = run(&[path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    // Validates but fails during execution (partition does not cover the
    // density support): exit 4.
    let path = write_scenario(
        dir,
        "runtime.json",
        r#"{"kind": "nmixture", "out_prefix": "x",
            "model": {"dim": 8, "interval": [0.0, 1.0]},
            "density": {"kind": "uniform", "a": 0.0, "b": 1.0},
            "partition": [[0.0, 0.4]],
            "nodes_per_component": 8,
            "times": [0.0]}"#,
    );
    let prefix = dir.join("runtime-out").to_string_lossy().into_owned();
    let out = run(&[path.to_str().unwrap(), "--out", &prefix]);
    assert_eq!(out.status.code(), Some(4));
    let report: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["error"], "NumericalFailure");
}

#[test]
fn rerun_through_the_binary_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let path = write_scenario(
        dir,
        "seeded.json",
        r#"{"kind": "inequality-suite", "out_prefix": "x", "seed": 11, "trials": 8}"#,
    );
    let prefix = dir.join("run").to_string_lossy().into_owned();

    let first = run(&[path.to_str().unwrap(), "--out", &prefix, "--threads", "2"]);
    assert!(first.status.success());
    let json1 = std::fs::read(format!("{prefix}.json")).unwrap();
    let csv1 = std::fs::read(format!("{prefix}.csv")).unwrap();

    let second = run(&[path.to_str().unwrap(), "--out", &prefix, "--threads", "1"]);
    assert!(second.status.success());
    assert_eq!(json1, std::fs::read(format!("{prefix}.json")).unwrap());
    assert_eq!(csv1, std::fs::read(format!("{prefix}.csv")).unwrap());
}
