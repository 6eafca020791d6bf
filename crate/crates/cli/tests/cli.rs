use std::path::Path;
use std::process::{Command, Output};

use mixalign::bundled::RUNNING_EXAMPLE_MODEL;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixalign")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn example_model() -> Value {
    serde_json::from_str(RUNNING_EXAMPLE_MODEL).unwrap()
}

fn write_model(dir: &Path, name: &str, model: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, model.to_string()).unwrap();
    path.to_string_lossy().into_owned()
}

fn report_without_timing(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let mut report: Value = serde_json::from_str(&text).unwrap();
    report.as_object_mut().unwrap().remove("timing");
    report
}

#[test]
fn check_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = run(&["check", "@example", "@example", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(dir.path().join("summary.csv").exists());
    }
    assert_eq!(report_without_timing(a.path()), report_without_timing(b.path()));
}

#[test]
fn workflow_mode_reports_cost_two() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.csv");
    std::fs::write(&log, "case_id,activity\n1,o\n1,p\n1,i\n1,s\n1,€\n1,s\n").unwrap();
    let out = run(&[
        "check",
        "@example",
        log.to_str().unwrap(),
        "--mode",
        "workflow",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = report_without_timing(dir.path());
    assert_eq!(report["mode"], "workflow");
    assert_eq!(report["variants"][0]["cost"], "2");
}

#[test]
fn unknown_template_names_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let mut model = example_model();
    model["constraints"][2]["template"] = "eventually_maybe".into();
    let path = write_model(dir.path(), "bad.json", &model);
    let out = run(&["check", &path, "@example", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("k3") && err.contains("eventually_maybe"), "{err}");
}

#[test]
fn validate_warns_about_free_transitions() {
    let out = run(&["validate", "@example"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out) + &stderr(&out);
    for t in ["t11", "t12", "t13"] {
        assert!(text.contains(&format!("'{t}'")), "{text}");
    }
    assert!(text.contains("0 error(s), 3 warning(s)"), "{text}");
}

#[test]
fn validate_rejects_ambiguous_labels() {
    let dir = tempfile::tempdir().unwrap();
    let mut model = example_model();
    model["transitions"][7]["label"] = "r".into();
    let path = write_model(dir.path(), "ambiguous.json", &model);
    let out = run(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out) + &stderr(&out);
    assert!(text.contains("AMBIGUOUS_LABEL"), "{text}");
}

#[test]
fn validate_rejects_nets_without_a_sink() {
    let dir = tempfile::tempdir().unwrap();
    let mut model = example_model();
    model["arcs"].as_array_mut().unwrap().retain(|a| a["to"] != "p9");
    let path = write_model(dir.path(), "nosink.json", &model);
    let out = run(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out) + &stderr(&out);
    assert!(text.contains("input place") || text.contains("output place"), "{text}");
}

#[test]
fn oracle_verify_passes_and_respects_strict_limits() {
    let out = run(&["oracle-verify", "@example", "@example"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 18, "{text}");
    assert!(text.contains("0 mismatched"), "{text}");

    let out = run(&["oracle-verify", "@example", "@example", "--strict-limits"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("LIMIT_EXCEEDED"));
}

#[test]
fn explain_prints_the_alignment() {
    let out = run(&["explain", "@example", "o", "n", "n"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("t10/x"), "{text}");
    assert!(text.contains("moves: 5"), "{text}");
    assert!(text.contains("cost: 1"), "{text}");
}

#[test]
fn explain_marks_violating_moves() {
    let out = run(&["explain", "@example", "o", "p", "i", "s", "€", "m", "n", "--mode", "violations"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("! k4"), "{text}");
    assert!(text.contains("cost: 3"), "{text}");
}

#[test]
fn unknown_violation_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "check",
        "@example",
        "@example",
        "--violation-cost-for",
        "k99=2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("k99"));
}
