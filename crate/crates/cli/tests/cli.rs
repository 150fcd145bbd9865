use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn schemas() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/schemas")
}

fn problem(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("problem.txt");
    fs::write(&path, text).unwrap();
    path
}

fn xsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xsat")).args(args).output().unwrap()
}

fn solve(text: &str, extra: &[&str]) -> Output {
    let dir = TempDir::new().unwrap();
    let path = problem(&dir, text);
    let mut args = vec![path.to_str().unwrap()];
    args.extend_from_slice(extra);
    xsat(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn unsatisfiable_exits_with_zero() {
    let o = solve("F", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("unsatisfiable"));
}

#[test]
fn satisfiable_prints_the_witness() {
    let o = solve("a & <1>b", &["--format", "xml"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        stdout(&o),
        "<a xmlns:solver=\"http://wam.inrialpes.fr/xml\" solver:target=\"true\">\n  <b/>\n</a>\n"
    );
}

#[test]
fn json_report() {
    let o = solve("a & <1>(# & b)", &["--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "satisfiable");
    assert!(v["witness"].as_str().unwrap().contains("<b solver:context=\"true\"/>"));
    let phases: Vec<&str> = v["timings"].as_array().unwrap().iter().map(|t| t["phase"].as_str().unwrap()).collect();
    assert_eq!(phases, ["parse", "expand", "normalize", "solve", "witness", "validate"]);

    let o = solve("F", &["--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "unsatisfiable");
    assert!(v.get("witness").is_none());
}

#[test]
fn errors_exit_with_two() {
    let o = xsat(&["/nonexistent/problem.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("read phase"), "{}", stderr(&o));

    let o = solve("a & ", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parse phase"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());

    let o = solve("type(\"missing.dtd\", \"html\")", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("expand phase"), "{}", stderr(&o));

    let o = solve("a", &["--format", "yaml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_exhaustion_is_reported() {
    let o = solve("a & <1>(b & <2>c) & let $X = <1>$X | d in $X", &["--budget", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("budget exhausted"), "{}", stderr(&o));
}

#[test]
fn single_dash_attributes_flag() {
    let o = solve("a", &["-attributes"]);
    assert_eq!(o.status.code(), Some(1));
    let o = solve("a", &["--attributes"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn schemas_are_found_in_the_schema_dir() {
    let dir = schemas().join("xhtml-basic");
    let text = "backward_incompatible(\"xhtml-basic10.dtd\", \"xhtml-basic10.dtd\", \"html\")";
    let o = solve(text, &["--schema-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn xhtml_backward_compatibility_is_refuted_deterministically() {
    let dir = schemas().join("xhtml-basic");
    let text = "backward_incompatible(\"xhtml-basic10.dtd\", \"xhtml-basic11.dtd\", \"html\")";
    let first = solve(text, &["--schema-dir", dir.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(1), "{}", stderr(&first));
    let out = stdout(&first);
    assert!(out.contains("<html"), "{out}");
    assert!(out.contains("invalid against xhtml-basic10.dtd"), "{out}");
    assert!(out.contains("valid against xhtml-basic11.dtd"), "{out}");

    let xml = |o: &Output| stdout(o).lines().take_while(|l| !l.starts_with("time:")).collect::<Vec<_>>().join("\n");
    let second = solve(text, &["--schema-dir", dir.to_str().unwrap()]);
    assert_eq!(xml(&first), xml(&second));
}
