use std::io::Write;
use std::process::{Command, Output, Stdio};

use pcw_testkit::corpus_dir;

const ENTRY: &str = "Configurations.ConfigurationController.CreateConfiguration";

fn pcw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcw")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn corpus(variant: &str) -> String {
    corpus_dir(variant).to_string_lossy().into_owned()
}

#[test]
fn parse_reports_counts() {
    let text = stdout(&pcw(&["parse", &corpus("buggy")]));
    assert_eq!(text.trim(), "3 file(s), 4 method(s), 0 diagnostic(s)");
    let json: serde_json::Value = serde_json::from_str(&stdout(&pcw(&["parse", &corpus("fixed"), "--format", "json"]))).unwrap();
    assert_eq!(json["methods"], 4);
}

#[test]
fn parse_failure_exits_nonzero_with_diagnostics() {
    let dir = std::env::temp_dir().join(format!("pcw-broken-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("Bad.mini"), "namespace A {\n  class B {\n    fn f( {\n").unwrap();
    let out = pcw(&["parse", dir.to_str().unwrap()]);
    assert!(!out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("Bad.mini:3:"), "{text}");
}

#[test]
fn endpoints_text() {
    let text = stdout(&pcw(&["endpoints", &corpus("buggy")]));
    assert_eq!(text, format!("POST /configurations\t{ENTRY}\tConfigurations.mini:4:9\n"));
}

#[test]
fn callgraph_dot_without_emphasis() {
    let text = stdout(&pcw(&["callgraph", &corpus("buggy"), "--entry", ENTRY]));
    assert!(text.starts_with("digraph callgraph {"));
    assert_eq!(text.matches(" -> ").count(), 2);
    assert!(!text.contains("penwidth"));
}

#[test]
fn reach_text_output() {
    let text = stdout(&pcw(&[
        "reach",
        &corpus("buggy"),
        "--method",
        ENTRY,
        "--target",
        "return",
        "--return-constraint",
        "ret == 400",
        "--constraint",
        "len(name) == 0",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "Status: Reachable");
    assert_eq!(lines[2], "Witness 1: name = \"\"");
    assert_eq!(lines.len(), 3);
}

#[test]
fn reach_rejects_bad_input() {
    for args in [
        ["--target", "call:No.Such.Method", "--constraint", "len(name) > 1"],
        ["--target", "stmt:9999", "--constraint", "len(name) > 1"],
        ["--target", "return", "--constraint", "len(name) >"],
        ["--target", "return", "--constraint", "x > 1"],
    ] {
        let mut full = vec!["reach", "", "--method", ENTRY];
        let dir = corpus("buggy");
        full[1] = &dir;
        full.extend(args);
        let out = pcw(&full);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    }
}

#[test]
fn tool_script_with_actions_and_export() {
    let script = format!(r#"{{"tool": "callGraphExplorer", "roots": ["{ENTRY}"]}}"#);
    let mut child = Command::new(env!("CARGO_BIN_EXE_pcw"))
        .args(["tool", &corpus("buggy"), "--script", "-", "--action", "1.1", "--export", "dot"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(script.as_bytes()).unwrap();
    let text = stdout(&child.wait_with_output().unwrap());
    assert!(text.starts_with("digraph tool {"));
    assert_eq!(text.matches(" -> ").count(), 2);

    let path = std::env::temp_dir().join(format!("pcw-catalog-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"tool": "apiEndpointCatalog"}"#).unwrap();
    let nav: serde_json::Value = serde_json::from_str(&stdout(&pcw(&[
        "tool",
        &corpus("buggy"),
        "--script",
        path.to_str().unwrap(),
        "--action",
        "1.1",
    ])))
    .unwrap();
    assert_eq!(nav["navigate"]["file"], "Configurations.mini");
    assert_eq!(nav["navigate"]["line"], 4);

    let out = pcw(&["tool", &corpus("buggy"), "--script", path.to_str().unwrap(), "--action", "7.7"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not part of the current model"));
}

#[test]
fn serve_rejects_invalid_config() {
    let path = std::env::temp_dir().join(format!("pcw-config-{}.toml", std::process::id()));
    std::fs::write(&path, "port = 8080\nmaxPaths = 0\n").unwrap();
    let out = pcw(&["serve", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("maxPaths must be positive"));
}
