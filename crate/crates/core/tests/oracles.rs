//! Differential runs against the testkit oracles.

use pcw_core::lang::Project;
use pcw_testkit::suites::{all_cfgs, dataflow_suite, dfa_suite, slice_suite, soundness_suite, taint_suite, SuiteReport};
use pcw_testkit::corpus_dir;

fn assert_clean(name: &str, report: &SuiteReport) {
    assert!(report.passed(), "{name}: {} of {} checks failed:\n{}", report.mismatches, report.checked, report.failures.join("\n"));
}

#[test]
fn worklist_matches_round_robin() {
    let mut cfgs = Vec::new();
    for variant in ["buggy", "fixed"] {
        cfgs.extend(all_cfgs(&Project::open(&corpus_dir(variant)).unwrap()));
    }
    assert_eq!(cfgs.len(), 8);
    let report = dataflow_suite(&cfgs, 250, 1);
    assert_clean("dataflow", &report);
}

#[test]
fn dfa_membership_matches_backtracker() {
    let report = dfa_suite(120, 5, 2);
    assert_clean("dfa", &report);
}

#[test]
fn slices_stay_closed() {
    let report = slice_suite(400, 3);
    assert_clean("slices", &report);
}

#[test]
fn summaries_match_inline_and_taint() {
    let report = taint_suite(300, 4);
    assert_clean("taint", &report);
}

#[test]
fn witnesses_drive_concrete_execution() {
    let report = soundness_suite(60, 5);
    assert!(report.failures.is_empty(), "{}", report.failures.join("\n\n"));
    assert!(report.models > 50, "only {} models: {:?}", report.models, report.statuses);
    assert_eq!(report.models, report.confirmed);
}
