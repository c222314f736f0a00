//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pcw_core::lang::{Project, QualifiedName};
use pcw_core::symexec::{concrete_execute, Target, Value, DEFAULT_FUEL};
use pcw_testkit::interp::interpret;
use pcw_testkit::regex_oracle::Backtracker;
use pcw_testkit::suites::{all_cfgs, dataflow_suite, dfa_suite, slice_suite, soundness_suite};
use pcw_testkit::taint::inline_and_taint;
use pcw_testkit::{corpus_dir, seeded};
use rand::Rng;
use serde_json::Value as Json;

const ENTRY: &str = "Configurations.ConfigurationController.CreateConfiguration";
const STORE: &str = "Storage.Twin.CreateDeviceTwinConfiguration";
const VALIDATE: &str = "Validation.Validator.IsConfigurationNameValid";
const BUGGY: &str = "[0-9a-z-]{1,64}";
const STRICT: &str = "[0-9a-z]([0-9a-z-]{0,62}[0-9a-z])?";

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

/// Runs the binary and parses its JSON output.
fn pcw_json(args: &[&str]) -> Result<(Json, Duration), String> {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_pcw")).args(args).output().map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    if !out.status.success() {
        return Err(format!("pcw {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let json = serde_json::from_slice(&out.stdout).map_err(|e| format!("bad JSON from pcw {args:?}: {e}"))?;
    Ok((json, elapsed))
}

fn scenario(variant: &str) -> Result<(Json, Duration), String> {
    let dir = corpus_dir(variant);
    let constraint = format!("name !~ \"{STRICT}\"");
    pcw_json(&[
        "reach",
        dir.to_str().unwrap(),
        "--method",
        ENTRY,
        "--target",
        &format!("call:{STORE}"),
        "--constraint",
        &constraint,
        "--format",
        "json",
    ])
}

/// Every character the two regexes' classes mention.
fn class_alphabet() -> Vec<char> {
    ('0'..='9').chain('a'..='z').chain(['-']).collect()
}

fn oracles() -> (Backtracker, Backtracker) {
    (Backtracker::new(BUGGY).expect("buggy regex"), Backtracker::new(STRICT).expect("strict regex"))
}

/// Shortest strings over the class alphabet accepted by the buggy regex but
/// not the strict regex, by enumeration.
fn shortest_counterexamples(max_len: usize) -> BTreeSet<String> {
    let (buggy, strict) = oracles();
    let alphabet = class_alphabet();
    let mut layer = vec![String::new()];
    for _ in 0..=max_len {
        let found: BTreeSet<String> = layer.iter().filter(|s| buggy.is_match(s) && !strict.is_match(s)).cloned().collect();
        if !found.is_empty() {
            return found;
        }
        layer = layer.iter().flat_map(|s| alphabet.iter().map(move |c| format!("{s}{c}"))).collect();
    }
    BTreeSet::new()
}

fn witness_names(report: &Json) -> Result<Vec<String>, String> {
    report["models"]
        .as_array()
        .ok_or("no models array")?
        .iter()
        .map(|m| m["name"].as_str().map(str::to_string).ok_or_else(|| format!("model without string name: {m}")))
        .collect()
}

fn criterion_1() -> Outcome {
    let (report, elapsed) = scenario("buggy")?;
    ensure(report["status"] == "Reachable", || format!("status {}", report["status"]))?;
    let names = witness_names(&report)?;
    ensure(!names.is_empty(), || "no witnesses".into())?;
    let (buggy, strict) = oracles();
    for n in &names {
        ensure(buggy.is_match(n) && !strict.is_match(n), || format!("witness {n:?} is not a counterexample"))?;
    }
    let shortest = names.iter().min_by_key(|s| (s.chars().count(), s.as_str())).unwrap();
    let expected = shortest_counterexamples(2);
    ensure(expected == BTreeSet::from(["-".to_string()]), || format!("enumeration found {expected:?}"))?;
    ensure(shortest == "-", || format!("shortest witness {shortest:?}"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("Reachable, {} witness(es), shortest {shortest:?}, {elapsed:.2?}", names.len()))
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let (report, _) = scenario("fixed")?;
    ensure(report["status"] == "ProvenUnreachable", || format!("status {}", report["status"]))?;
    ensure(report["models"].as_array().is_some_and(|m| m.is_empty()), || format!("models {}", report["models"]))?;

    let project = Project::open(&corpus_dir("fixed")).map_err(|e| e.to_string())?;
    let entry = QualifiedName::parse(ENTRY).unwrap();
    let (_, strict) = oracles();
    let alphabet = class_alphabet();
    let mut rng = seeded(0xf022);
    let mut admitted = 0;
    for _ in 0..10_000 {
        let len = rng.random_range(0..=80);
        let s: String = (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
        if strict.is_match(&s) {
            continue;
        }
        admitted += 1;
        let out = interpret(&project, &entry, &[Value::Str(s.clone())], 100_000).map_err(|e| format!("{s:?}: {e:?}"))?;
        ensure(!out.calls.iter().any(|c| c.to_string() == STORE), || format!("counterexample {s:?}"))?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("ProvenUnreachable, 0 witnesses, {admitted} of 10000 fuzz inputs satisfied the constraint and none reached storage, {elapsed:.2?}"))
}

fn criterion_3() -> Outcome {
    let dir = corpus_dir("buggy");
    let (graph, elapsed) =
        pcw_json(&["callgraph", dir.to_str().unwrap(), "--entry", ENTRY, "--emphasize-param", "0", "--format", "json"])?;
    let nodes = graph["nodes"].as_array().ok_or("no nodes")?;
    let edges = graph["edges"].as_array().ok_or("no edges")?;
    let labels: BTreeSet<String> = nodes.iter().filter_map(|n| n["label"].as_str().map(str::to_string)).collect();
    let emphasized: BTreeSet<String> = nodes
        .iter()
        .filter(|n| n["emphasized"] == true)
        .filter_map(|n| n["label"].as_str().map(str::to_string))
        .collect();
    let corpus: BTreeSet<String> = [ENTRY, STORE, VALIDATE].iter().map(|s| s.to_string()).collect();
    ensure(nodes.len() == 3 && labels == corpus, || format!("nodes {labels:?}"))?;
    ensure(edges.len() == 2, || format!("{} edges", edges.len()))?;
    ensure(emphasized == corpus, || format!("emphasized {emphasized:?}"))?;
    let project = Project::open(&dir).map_err(|e| e.to_string())?;
    let oracle: BTreeSet<String> =
        inline_and_taint(&project, &QualifiedName::parse(ENTRY).unwrap(), 0).iter().map(|q| q.to_string()).collect();
    ensure(emphasized == oracle, || format!("oracle says {oracle:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("3 nodes, 2 edges, all emphasized as the oracle predicts, {elapsed:.2?}"))
}

/// Declaration span of the annotated handler, found by scanning the text:
/// from the `@` of the annotation to just past the brace closing the body.
fn declared_span(path: &Path) -> (u32, u32, u32, u32) {
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let start = lines.iter().position(|l| l.contains("@endpoint")).unwrap();
    let start_col = lines[start].chars().position(|c| c == '@').unwrap() + 1;
    let mut depth = 0;
    for (i, line) in lines.iter().enumerate().skip(start) {
        for (j, c) in line.chars().enumerate() {
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        return ((start + 1) as u32, start_col as u32, (i + 1) as u32, (j + 2) as u32);
                    }
                }
                _ => {}
            }
        }
    }
    panic!("unbalanced braces in {}", path.display());
}

fn criterion_4() -> Outcome {
    let dir = corpus_dir("buggy");
    let (rows, _) = pcw_json(&["endpoints", dir.to_str().unwrap(), "--format", "json"])?;
    let rows = rows.as_array().ok_or("not a list")?;
    ensure(rows.len() == 1, || format!("{} endpoints", rows.len()))?;
    let row = &rows[0];
    ensure(row["label"] == "POST /configurations", || format!("label {}", row["label"]))?;
    ensure(row["handler"] == ENTRY, || format!("handler {}", row["handler"]))?;
    let span = &row["span"];
    let expected = declared_span(&dir.join("Configurations.mini"));
    let actual = (
        span["startLine"].as_u64().unwrap_or(0) as u32,
        span["startCol"].as_u64().unwrap_or(0) as u32,
        span["endLine"].as_u64().unwrap_or(0) as u32,
        span["endCol"].as_u64().unwrap_or(0) as u32,
    );
    ensure(span["file"] == "Configurations.mini" && actual == expected, || format!("span {span} vs {expected:?}"))?;
    Ok(format!("\"POST /configurations\" navigates to Configurations.mini {expected:?}"))
}

fn criterion_5() -> Outcome {
    let mut cfgs = Vec::new();
    for variant in ["buggy", "fixed"] {
        cfgs.extend(all_cfgs(&Project::open(&corpus_dir(variant)).map_err(|e| e.to_string())?));
    }
    let corpus = cfgs.len();
    let report = dataflow_suite(&cfgs, 250, 0xa5);
    ensure(report.passed(), || format!("{} mismatches: {}", report.mismatches, report.failures.join("; ")))?;
    Ok(format!("{corpus} corpus + 250 random CFGs, {} comparisons, 0 mismatches", report.checked))
}

fn criterion_6() -> Outcome {
    let report = dfa_suite(500, 6, 0xa6);
    ensure(report.passed(), || format!("{} mismatches: {}", report.mismatches, report.failures.join("; ")))?;
    Ok(format!("500 pairs, {} membership checks, 0 mismatches", report.checked))
}

fn criterion_7() -> Outcome {
    let report = soundness_suite(60, 0xa7);
    ensure(report.failures.is_empty(), || report.failures.join("\n"))?;
    ensure(report.models > 0, || "no models produced".into())?;
    ensure(report.models == report.confirmed, || format!("{} of {} confirmed", report.confirmed, report.models))?;

    // The scenario's witnesses too.
    let project = Project::open(&corpus_dir("buggy")).map_err(|e| e.to_string())?;
    let entry = project.resolve_method(ENTRY).map_err(|e| e.to_string())?;
    let target = Target::CallTo { method: project.resolve_method(STORE).map_err(|e| e.to_string())? };
    let (scenario, _) = scenario("buggy")?;
    let names = witness_names(&scenario)?;
    for n in &names {
        let trace = concrete_execute(&project, &entry, &[Value::Str(n.clone())], DEFAULT_FUEL)
            .map_err(|e| format!("{n:?}: {e}"))?;
        ensure(trace.reaches(&target), || format!("witness {n:?} does not reach storage"))?;
    }
    Ok(format!(
        "{} of {} models across {} queries confirmed, plus {} scenario witnesses",
        report.confirmed,
        report.models,
        report.queries,
        names.len()
    ))
}

fn criterion_8() -> Outcome {
    let report = slice_suite(1000, 0xa8);
    ensure(report.passed(), || format!("{} violations: {}", report.mismatches, report.failures.join("; ")))?;
    Ok(format!("1000 sequences, {} checks, 0 violations", report.checked))
}

fn criterion_9() -> Outcome {
    let (report, _) = scenario("buggy")?;
    let lowered: BTreeMap<String, u64> = report["loweredMethods"]
        .as_object()
        .ok_or("no loweredMethods")?
        .iter()
        .map(|(k, v)| (k.clone(), v.as_u64().unwrap_or(0)))
        .collect();
    // The chain the query explores: the handler and the validator it calls
    // before the storage call. The storage method is the target itself.
    let chain: BTreeMap<String, u64> = [(ENTRY.to_string(), 1), (VALIDATE.to_string(), 1)].into();
    ensure(lowered == chain, || format!("lowered {lowered:?}"))?;

    let project = Project::open(&corpus_dir("buggy")).map_err(|e| e.to_string())?;
    project.full_slice().map_err(|e| e.to_string())?;
    ensure(project.lowering_counts().is_empty(), || "building the fact slice lowered methods".into())?;
    Ok(format!("lowered {} of 4 methods, once each", lowered.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("single-dash name reaches storage on the buggy corpus", criterion_1),
        ("fixed corpus is proven unreachable", criterion_2),
        ("call graph and parameter emphasis", criterion_3),
        ("endpoint catalog navigation", criterion_4),
        ("worklist fixpoint vs round-robin", criterion_5),
        ("DFA pipeline vs backtracking", criterion_6),
        ("symbolic models drive concrete execution", criterion_7),
        ("slice closure invariants", criterion_8),
        ("lazy CFG extraction", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS {}: {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {}: {name}: {reason}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
