use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn qflux(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qflux")).args(args).output().unwrap()
}

fn qflux_on(cmd: &str, region: &str, extra: &[&str]) -> Output {
    let path = corpus(region);
    let mut args = vec![cmd, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    qflux(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn phi_of_the_square() {
    let o = qflux_on("phi", "disk2x2.txt", &[]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("phi_disk2x2.txt"));
}

#[test]
fn phi_specialized() {
    let o = qflux_on("phi", "frame6x6.txt", &["--normalized", "--q-at", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("phi_frame6x6_q1.txt"));
}

#[test]
fn tilings_list() {
    let o = qflux_on("tilings", "disk2x3.txt", &["--list"]);
    assert_eq!(stdout(&o), golden("tilings_disk2x3.txt"));
    let o = qflux_on("tilings", "frame6x6.txt", &["--count"]);
    assert_eq!(stdout(&o).trim(), "1444");
}

#[test]
fn walls_of_corpus() {
    assert_eq!(stdout(&qflux_on("walls", "ladder.txt", &[])), golden("walls_ladder.txt"));
    assert!(stdout(&qflux_on("walls", "frame8x8.txt", &[])).contains("wall-free"));
}

#[test]
fn transfer_blocks() {
    let o = qflux_on("transfer", "frame6x6.txt", &["--bi-active", "--show-blocks"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("transfer_frame6x6.txt"));
}

#[test]
fn flipgraph_dot() {
    let o = qflux_on("flipgraph", "disk2x4.txt", &["--dot"]);
    let text = stdout(&o);
    assert!(text.starts_with("digraph"));
    assert_eq!(text.matches("->").count(), 5);
}

#[test]
fn malformed_region_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.txt");
    std::fs::write(&p, "##\n#x\n").unwrap();
    let o = qflux(&["validate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2, column 2"), "{err}");
}

#[test]
fn region_errors_exit_2() {
    assert_eq!(qflux(&["validate", "/nonexistent/region.txt"]).status.code(), Some(2));
    assert_eq!(qflux_on("walls", "disk2x2.txt", &[]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("split.txt");
    std::fs::write(&p, "#.#\n").unwrap();
    assert_eq!(qflux(&["phi", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_report_is_valid_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| dir.path().join(name);
    let args = |report: &PathBuf| {
        vec![
            "verify".to_string(),
            corpus("ring4x4.txt").display().to_string(),
            corpus("frame6x6.txt").display().to_string(),
            corpus("disk2x3.txt").display().to_string(),
            "--all".into(),
            "--quiet".into(),
            "--report".into(),
            report.display().to_string(),
        ]
    };
    let a = Command::new(env!("CARGO_BIN_EXE_qflux")).args(args(&out("a.json"))).output().unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_qflux"))
        .args(args(&out("b.json")))
        .env("QFLUX_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert!(a.stdout.is_empty());
    let ja = std::fs::read(out("a.json")).unwrap();
    assert_eq!(ja, std::fs::read(out("b.json")).unwrap());

    let report: Value = serde_json::from_slice(&ja).unwrap();
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");

    let ids: Vec<&str> = report["certifications"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["regionId"].as_str().unwrap())
        .collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_eq!(report["totals"]["fail"], 0);
}

#[test]
fn verify_with_custom_parameters() {
    let o = qflux_on("verify", "lhole.txt", &["--q", "3/2", "--cover", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("PASS theorem-b[q=3/2]"));
    assert!(text.contains("PASS cover-relation[n=2,q=3/2]"));
    assert!(!text.contains("n=3"));
}

#[test]
fn schema_rejects_a_bad_verdict() {
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let bad = serde_json::json!({
        "regions": [],
        "certifications": [{ "name": "x", "verdict": "MAYBE", "witness": {}, "regionId": "r" }],
        "totals": { "pass": 0, "fail": 0, "skip": 0 },
    });
    assert!(!validator.is_valid(&bad));
}

#[test]
fn json_format() {
    let o = qflux(&["--format", "json", "phi", corpus("disk2x2.txt").to_str().unwrap()]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["raw"], "-q - 1");
    assert_eq!(v["phi"], "-q - 1");
}
