use std::io::Write;
use std::process::{Command, Output, Stdio};

use coopetitive::scalar::s;
use coopetitive::Scalar;
use serde_json::Value;

const PAIR: &str = r#"{"advertisers": [{"name": "A", "value": "2"}, {"name": "B", "value": "2"},
  {"name": "E", "value": "3"}], "ads": [["A", "B"], ["E"]]}"#;

const QUARTET: &str = r#"{"advertisers": [{"name": "A", "value": "1"}, {"name": "B", "value": "1"},
  {"name": "C", "value": "1"}, {"name": "D", "value": "1"}, {"name": "E", "value": "2.9"}],
  "ads": [["A", "B", "C", "D"], ["E"]]}"#;

const TRIANGLE: &str = r#"{"advertisers": [{"name": "A", "value": "1"}, {"name": "B", "value": "1"},
  {"name": "C", "value": "1"}, {"name": "D", "value": "1"}, {"name": "E", "value": "1"}],
  "ads": [["A", "B", "C"], ["A", "D"], ["B", "E"]]}"#;

const SINGLE: &str = r#"{"advertisers": [{"name": "A", "value": "5"}], "ads": [["A"]]}"#;

const THIRDS: &str = r#"{"advertisers": [{"name": "A", "value": "1"}, {"name": "B", "value": "1"},
  {"name": "C", "value": "1"}, {"name": "E", "value": "1"}], "ads": [["A", "B", "C"], ["E"]]}"#;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_coopetitive"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(args: &[&str], stdin: &str) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = run(&all, stdin);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Value cell of the row labelled `key` in the titled section.
fn lookup<'a>(report: &'a Value, section: &str, key: &str) -> &'a Value {
    let sec = report["sections"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["title"] == section)
        .unwrap_or_else(|| panic!("no section {section}"));
    let row = sec["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r[0] == key)
        .unwrap_or_else(|| panic!("no row {key}"));
    &row[row.as_array().unwrap().len() - 1]
}

fn number(v: &Value) -> Scalar {
    v.as_str().unwrap().parse().unwrap()
}

fn temp_file(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("coopetitive-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn solve_each_mechanism() {
    let vcg = json(&["solve", "-", "--mechanism", "vcg"], PAIR);
    assert_eq!(number(lookup(&vcg, "summary", "revenue")), s("2"));
    let egal = json(&["solve", "-", "--mechanism", "egalitarian"], PAIR);
    assert_eq!(number(lookup(&egal, "summary", "revenue")), s("3"));
    let bounds = json(&["solve", "-", "--mechanism", "bounds"], PAIR);
    assert_eq!(number(lookup(&bounds, "summary", "revenue lower bound")), s("3"));
    assert_eq!(number(lookup(&bounds, "summary", "equilibrium revenue min")), s("3"));
    assert_eq!(number(lookup(&bounds, "summary", "equilibrium revenue max")), s("3"));
}

#[test]
fn verify_frontier_endpoint() {
    let path = temp_file("triangle.json", TRIANGLE);
    let path = path.to_str().unwrap();
    // Endpoint (1, 1, 0) of the frontier.
    let r = json(&["verify", path, "-"], r#"{"bids": {"A": "1", "B": "1", "C": "0"}}"#);
    for check in ["individually rational", "cooperative envy-free", "equilibrium"] {
        assert_eq!(lookup(&r, "checks", check), "", "{check}");
    }
    let checks = &r["sections"][1]["rows"];
    for row in checks.as_array().unwrap() {
        assert_eq!(row[1], true, "{row}");
    }
    assert!(r["sections"].as_array().unwrap().iter().any(|s| s["title"] == "certificate"));
}

#[test]
fn verify_reports_violations() {
    let path = temp_file("triangle2.json", TRIANGLE);
    let path = path.to_str().unwrap();
    let r = json(&["verify", path, "-"], r#"{"bids": {"A": "1.5", "B": "1", "C": "0"}}"#);
    let row = &r["sections"][1]["rows"][0];
    assert_eq!(row[1], false);
    assert!(row[2].as_str().unwrap().starts_with("A "), "{row}");

    let r = json(&["verify", path, "-"], r#"{"bids": {"A": "0.6", "B": "0.6", "C": "0.6"}}"#);
    let rows = r["sections"][1]["rows"].as_array().unwrap();
    assert_eq!(rows[1][1], true);
    assert_eq!(rows[2][1], false);
}

#[test]
fn compare_examples() {
    let q = json(&["compare", "-"], QUARTET);
    assert_eq!(number(lookup(&q, "summary", "vcg revenue")), s("0"));
    assert_eq!(number(lookup(&q, "summary", "egalitarian revenue")), s("2.9"));

    let t = json(&["compare", "-"], TRIANGLE);
    assert_eq!(number(lookup(&t, "summary", "vcg revenue")), s("0"));
    assert_eq!(number(lookup(&t, "summary", "equilibrium revenue min")), s("1"));
    assert_eq!(number(lookup(&t, "summary", "equilibrium revenue max")), s("2"));
    let relations = t["sections"].as_array().unwrap().iter().find(|s| s["title"] == "relations").unwrap();
    assert_eq!(relations["rows"][0][1], "<");

    let one = json(&["compare", "-"], SINGLE);
    for key in [
        "vcg revenue",
        "egalitarian revenue",
        "revenue lower bound",
        "equilibrium revenue min",
        "equilibrium revenue max",
    ] {
        assert_eq!(number(lookup(&one, "summary", key)), Scalar::zero(), "{key}");
    }
}

#[test]
fn reports_keep_fractions_exact() {
    let r = json(&["solve", "-"], THIRDS);
    assert_eq!(number(lookup(&r, "advertisers", "A")), s("2/3"));
    let bid = &r["sections"][1]["rows"][0][2];
    assert_eq!(number(bid), s("1/3"));

    let table = run(&["solve", "-"], THIRDS);
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("1/3 (≈0.333333)"), "{text}");

    let csv = run(&["solve", "-", "--format", "csv"], THIRDS);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.contains("A,1,1/3,1/3,2/3"), "{text}");
}

#[test]
fn trace_flag_adds_log() {
    let r = json(&["solve", "-", "--trace"], PAIR);
    let trace = r["sections"].as_array().unwrap().iter().find(|s| s["title"] == "lowering trace").unwrap();
    assert!(trace["rows"][1][0].as_str().unwrap().starts_with("round 1: lower by 0.5"));
    let plain = json(&["solve", "-"], PAIR);
    assert!(plain["sections"].as_array().unwrap().iter().all(|s| s["title"] != "lowering trace"));
}

#[test]
fn ties_are_flagged() {
    let tie = r#"{"advertisers": [{"name": "A", "value": "1"}, {"name": "B", "value": "1"}], "ads": [["A"], ["B"]]}"#;
    let r = json(&["solve", "-", "--mechanism", "vcg"], tie);
    assert!(r["notes"][0].as_str().unwrap().contains("tie"));
}

#[test]
fn polytope_weights() {
    let r = json(&["polytope", "-", "--weights", "1,2,3"], TRIANGLE);
    let sample = r["sections"].as_array().unwrap().iter().find(|s| s["title"] == "weighted sample").unwrap();
    let bids: Vec<Scalar> = sample["rows"].as_array().unwrap().iter().map(|row| number(&row[3])).collect();
    assert_eq!(bids, vec![s("1"), s("1"), s("0")]);

    let bad = run(&["polytope", "-", "--weights", "1,2"], TRIANGLE);
    assert!(!bad.status.success());
    let bad = run(&["polytope", "-", "--weights", "1,0,1"], TRIANGLE);
    assert!(!bad.status.success());
}

#[test]
fn oracle_agrees_on_triangle() {
    let r = json(&["oracle", "-", "--epsilon", "1/2"], TRIANGLE);
    assert_eq!(number(lookup(&r, "summary", "grid equilibria")), s("3"));
    assert_eq!(lookup(&r, "summary", "egalitarian verified"), true);
    assert_eq!(lookup(&r, "summary", "vcg agrees with brute force"), true);
}

#[test]
fn oracle_budget_error_is_verbatim() {
    let out = run(&["oracle", "-", "--epsilon", "0.001", "--budget", "100"], TRIANGLE);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("budget allows 100"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn contracts_command() {
    let doc = r#"{"advertisers": [{"name": "M", "value": "10"}, {"name": "O", "value": "1"},
      {"name": "A", "value": "5"}], "ads": [["O", "M"], ["A"]], "owners": ["O", "A"], "slots": ["1"]}"#;
    let r = json(&["contracts", "-", "--subsidy-grid", "1", "--responder", "M"], doc);
    let br = r["sections"].as_array().unwrap().iter().find(|s| s["title"] == "best responses").unwrap();
    let row = &br["rows"][0];
    assert_eq!(row[0], "M");
    assert_eq!(row[4], false);
    assert!(number(&row[2]) > number(&row[3]));

    let missing = run(&["contracts", "-", "--subsidy-grid", "1"], PAIR);
    assert!(!missing.status.success());
}

#[test]
fn errors_exit_nonzero() {
    let out = run(&["solve", "-"], "{not json");
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 1"));
    let out = run(&["solve", "/definitely/not/here.json"], "");
    assert!(!out.status.success());
    let out = run(&["verify", "-", "-"], PAIR);
    assert!(!out.status.success());
    let ok = run(&["solve", "-"], PAIR);
    assert!(ok.status.success());
    assert!(ok.stderr.is_empty());
}
