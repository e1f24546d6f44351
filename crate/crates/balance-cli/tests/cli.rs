//! End-to-end tests of the `balance` binary: exit codes, JSON output
//! shapes, determinism, and error reporting.

use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn balance(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balance"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("balance-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn stderr_text(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

const SINGLE_EDGE: &str =
    r#"{"field":{"type":"Q"},"vertices":2,"edges":[{"u":1,"v":2,"weight":"5"}]}"#;

/// Triangle with two zero edges and a pendant: the canonical (4)_A instance
/// (d12 ≠ 0, d34 ≠ 0, d13 = d23 = 0).
const PENDANT_TRIANGLE: &str = r#"{"field":{"type":"Q"},"vertices":4,"edges":[
    {"u":1,"v":2,"weight":"1"},{"u":1,"v":3,"weight":"0"},
    {"u":2,"v":3,"weight":"0"},{"u":3,"v":4,"weight":"1"}]}"#;

const K4_ONES_F3: &str = r#"{"field":{"type":"Fp","p":3},"vertices":4,"edges":[
    {"u":1,"v":2,"weight":"1"},{"u":1,"v":3,"weight":"1"},{"u":1,"v":4,"weight":"1"},
    {"u":2,"v":3,"weight":"1"},{"u":2,"v":4,"weight":"1"},{"u":3,"v":4,"weight":"1"}]}"#;

/// Class-2 structure on four generators with a four-dimensional derived
/// space: brackets c12=e1, c13=e2, c14=e3, c23=e4, the rest zero.
fn example_structure(field: &str) -> String {
    format!(
        r#"{{"field":{field},"generators":4,"target_dim":4,"brackets":[
            {{"i":1,"j":2,"value":["1","0","0","0"]}},
            {{"i":1,"j":3,"value":["0","1","0","0"]}},
            {{"i":1,"j":4,"value":["0","0","1","0"]}},
            {{"i":2,"j":3,"value":["0","0","0","1"]}}]}}"#
    )
}

#[test]
fn check_graph_labels_a_single_edge() {
    let input = write_temp("single_edge.json", SINGLE_EDGE);
    let out = balance(&["check-graph", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    assert_eq!(json["status"], "labelable");
    let labels = json["labeling"].as_array().unwrap();
    assert_eq!(labels.len(), 2);
    // a1·b2 − a2·b1 = 5 must hold for the emitted rational labels.
    let parse = |s: &Value| -> f64 {
        let t = s.as_str().unwrap();
        match t.split_once('/') {
            Some((n, d)) => n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap(),
            None => t.parse().unwrap(),
        }
    };
    let (a1, b1) = (parse(&labels[0][0]), parse(&labels[0][1]));
    let (a2, b2) = (parse(&labels[1][0]), parse(&labels[1][1]));
    assert_eq!(a1 * b2 - a2 * b1, 5.0);
}

#[test]
fn label_graph_alias_matches_check_graph() {
    let input = write_temp("alias.json", SINGLE_EDGE);
    let a = balance(&["check-graph", "--input", input.to_str().unwrap()]);
    let b = balance(&["label-graph", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_graph_reports_the_4a_defect_with_exit_2() {
    let input = write_temp("pendant_triangle.json", PENDANT_TRIANGLE);
    let out = balance(&["check-graph", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let json = stdout_json(&out);
    assert_eq!(json["status"], "not_labelable");
    assert_eq!(json["certificate"]["family"], "4A");
    assert_eq!(json["certificate"]["m"], 4);
}

#[test]
fn check_graph_output_is_byte_deterministic() {
    let input = write_temp("det.json", PENDANT_TRIANGLE);
    let a = balance(&["check-graph", "--input", input.to_str().unwrap()]);
    let b = balance(&["check-graph", "--input", input.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_changes_labels_but_never_the_decision() {
    let input = write_temp("seeded.json", SINGLE_EDGE);
    let plain = balance(&["check-graph", "--input", input.to_str().unwrap()]);
    let seeded = balance(&["check-graph", "--input", input.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(code(&plain), 0);
    assert_eq!(code(&seeded), 0);
    assert_eq!(stdout_json(&plain)["status"], stdout_json(&seeded)["status"]);
}

#[test]
fn malformed_input_exits_1_with_diagnostics() {
    let truncated = write_temp("trunc.json", "{\"field\":{\"type\":\"Q\"},\"vertices\":2");
    let out = balance(&["check-graph", "--input", truncated.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr_text(&out).contains("malformed JSON"));

    let missing = std::env::temp_dir().join("balance-definitely-missing.json");
    let out = balance(&["check-graph", "--input", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr_text(&out).contains("cannot read"));

    let reversed = write_temp(
        "reversed.json",
        r#"{"field":{"type":"Q"},"vertices":3,"edges":[{"u":3,"v":1,"weight":"1"}]}"#,
    );
    let out = balance(&["check-graph", "--input", reversed.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr_text(&out).contains("u < v"));
}

#[test]
fn detect_defects_lists_the_k4_pluecker_certificate() {
    let input = write_temp("k4.json", K4_ONES_F3);
    let out = balance(&["detect-defects", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    let certificates = json.as_array().unwrap();
    assert_eq!(certificates.len(), 1);
    assert_eq!(certificates[0]["family"], "4C");
}

#[test]
fn detect_defects_exits_0_even_when_nothing_is_found() {
    let input = write_temp("clean.json", SINGLE_EDGE);
    let out = balance(&["detect-defects", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out), Value::Array(vec![]));
}

#[test]
fn check_lie_accepts_a_basis_bracket() {
    let structure = write_temp("lie_s.json", &example_structure(r#"{"type":"Q"}"#));
    let element = write_temp("lie_x5.json", r#"{"value":["1","0","0","0"]}"#);
    let out = balance(&[
        "check-lie",
        "--structure",
        structure.to_str().unwrap(),
        "--element",
        element.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    assert_eq!(json["status"], "yes");
    assert!(json["witness"]["a"].is_array());
    assert!(json["witness"]["b"].is_array());
}

#[test]
fn check_lie_refutes_with_a_4a_certificate() {
    for field in [r#"{"type":"Q"}"#, r#"{"type":"Fp","p":3}"#] {
        let structure = write_temp("lie_s2.json", &example_structure(field));
        let element = write_temp("lie_x78.json", r#"{"value":["0","0","1","1"]}"#);
        let out = balance(&[
            "check-lie",
            "--structure",
            structure.to_str().unwrap(),
            "--element",
            element.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 2, "field {field}");
        let json = stdout_json(&out);
        assert_eq!(json["status"], "no");
        assert_eq!(json["refutations"][0]["certificate"]["family"], "4A");
    }
}

#[test]
fn check_lie_rejects_elements_outside_the_span() {
    let structure = write_temp(
        "lie_span.json",
        r#"{"field":{"type":"Fp","p":3},"generators":2,"target_dim":2,
            "brackets":[{"i":1,"j":2,"value":["1","0"]}]}"#,
    );
    let element = write_temp("lie_out.json", r#"{"value":["0","1"]}"#);
    let out = balance(&[
        "check-lie",
        "--structure",
        structure.to_str().unwrap(),
        "--element",
        element.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let err = stderr_text(&out);
    assert!(err.contains("outside the span"));
    assert!(err.contains("input error"));
}

#[test]
fn check_group_decides_heisenberg_and_transcribed_refutation() {
    let heisenberg = write_temp(
        "group_h.json",
        r#"{"p":5,"generators":2,"central_rank":1,"exponent_p":true,
            "commutators":[{"i":1,"j":2,"exponents":[3]}]}"#,
    );
    let target = write_temp("group_t.json", r#"{"exponents":[4]}"#);
    let out = balance(&[
        "check-group",
        "--group",
        heisenberg.to_str().unwrap(),
        "--target",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    assert_eq!(json["status"], "yes");
    assert_eq!(json["witness"]["alpha"].as_array().unwrap().len(), 2);

    // The four-generator structure transcribed as a p=3 group: z3·z4 is
    // not a commutator, and the refutation is the same 4A certificate.
    let group = write_temp(
        "group_4a.json",
        r#"{"p":3,"generators":4,"central_rank":4,"exponent_p":true,"commutators":[
            {"i":1,"j":2,"exponents":[1,0,0,0]},
            {"i":1,"j":3,"exponents":[0,1,0,0]},
            {"i":1,"j":4,"exponents":[0,0,1,0]},
            {"i":2,"j":3,"exponents":[0,0,0,1]}]}"#,
    );
    let target = write_temp("group_z34.json", r#"{"exponents":[0,0,1,1]}"#);
    let out = balance(&[
        "check-group",
        "--group",
        group.to_str().unwrap(),
        "--target",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let json = stdout_json(&out);
    assert_eq!(json["status"], "no");
    assert_eq!(json["refutations"][0]["certificate"]["family"], "4A");
}

#[test]
fn oracle_graph_agrees_with_the_engine() {
    let input = write_temp("oracle_k4.json", K4_ONES_F3);
    let engine = balance(&["check-graph", "--input", input.to_str().unwrap()]);
    let oracle = balance(&["oracle-graph", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&engine), 2);
    assert_eq!(code(&oracle), 2);
    assert_eq!(stdout_json(&oracle)["status"], "not_labelable_oracle");
}

#[test]
fn oracle_image_matches_check_lie() {
    let structure = write_temp("oi_s.json", &example_structure(r#"{"type":"Fp","p":3}"#));
    let yes = write_temp("oi_yes.json", r#"{"value":["1","0","0","0"]}"#);
    let no = write_temp("oi_no.json", r#"{"value":["0","0","1","1"]}"#);
    let out = balance(&[
        "oracle-image",
        "--structure",
        structure.to_str().unwrap(),
        "--element",
        yes.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["status"], "yes");
    let out = balance(&[
        "oracle-image",
        "--structure",
        structure.to_str().unwrap(),
        "--element",
        no.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout_json(&out)["status"], "no");
}

#[test]
fn verify_sweep_is_worker_invariant_and_exits_0() {
    let one = balance(&["verify-sweep", "--n", "3", "--p", "2", "--workers", "1"]);
    let four = balance(&["verify-sweep", "--n", "3", "--p", "2", "--workers", "4"]);
    assert_eq!(code(&one), 0);
    assert_eq!(code(&four), 0);
    assert_eq!(one.stdout, four.stdout);
    let json = stdout_json(&one);
    assert_eq!(json["graphs"], 27);
    assert_eq!(json["agree"], 27);
    assert_eq!(json["disagree"], 0);
}

#[test]
fn verify_sweep_rejects_oversized_exhaustive_runs() {
    let out = balance(&["verify-sweep", "--n", "5", "--p", "3"]);
    assert_eq!(code(&out), 1);
    assert!(stderr_text(&out).contains("budget"));
}

#[test]
fn verify_sweep_sample_mode_is_seed_deterministic() {
    let args =
        ["verify-sweep", "--n", "4", "--p", "3", "--mode", "sample", "--samples", "60", "--seed", "11"];
    let a = balance(&args);
    let b = balance(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["graphs"], 60);
}
