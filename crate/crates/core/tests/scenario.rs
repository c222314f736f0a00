use pcw_core::lang::{Project, SpanTarget};
use pcw_core::symexec::{analyze_reachability, parse_constraint, query_symbols, ReachQuery, ReachStatus, Target, Value};
use pcw_testkit::corpus_dir;

const STRICT: &str = "[0-9a-z]([0-9a-z-]{0,62}[0-9a-z])?";

fn query(project: &Project) -> ReachQuery {
    let method = project.resolve_method("Configurations.ConfigurationController.CreateConfiguration").unwrap();
    let callee = project.resolve_method("Storage.Twin.CreateDeviceTwinConfiguration").unwrap();
    let symbols = query_symbols(project, &method, false).unwrap();
    let mut q = ReachQuery::new(method, Target::CallTo { method: callee });
    q.param_constraints.push(parse_constraint(&format!("name !~ \"{STRICT}\""), &symbols).unwrap());
    q
}

#[test]
fn dash_reaches_storage_on_buggy_corpus() {
    let project = Project::open(&corpus_dir("buggy")).unwrap();
    let report = analyze_reachability(&project, &query(&project)).unwrap();
    assert_eq!(report.status, ReachStatus::Reachable);
    let names: Vec<&str> = report
        .models
        .iter()
        .map(|m| match &m["name"] {
            Value::Str(s) => s.as_str(),
            v => panic!("{v:?}"),
        })
        .collect();
    assert_eq!(names.iter().min_by_key(|s| (s.chars().count(), **s)), Some(&"-"));
}

#[test]
fn fixed_corpus_is_unreachable() {
    let project = Project::open(&corpus_dir("fixed")).unwrap();
    let report = analyze_reachability(&project, &query(&project)).unwrap();
    assert_eq!(report.status, ReachStatus::ProvenUnreachable);
    assert!(report.models.is_empty());
}

#[test]
fn reachability_lowers_only_the_explored_chain() {
    let project = Project::open(&corpus_dir("buggy")).unwrap();
    analyze_reachability(&project, &query(&project)).unwrap();
    let lowered: Vec<(String, usize)> = project
        .lowering_counts()
        .into_iter()
        .map(|(id, n)| (project.index().qualified_name(&id).unwrap().to_string(), n))
        .collect();
    // Exploration stops on entry to the target, so its body is never needed.
    assert_eq!(
        lowered,
        vec![
            ("Configurations.ConfigurationController.CreateConfiguration".to_string(), 1),
            ("Validation.Validator.IsConfigurationNameValid".to_string(), 1),
        ]
    );
}

#[test]
fn handler_span_covers_annotation_and_body() {
    let project = Project::open(&corpus_dir("buggy")).unwrap();
    let id = project.resolve_method("Configurations.ConfigurationController.CreateConfiguration").unwrap();
    let span = project.source_span(&SpanTarget::Element(id)).unwrap();
    // Line 4 column 9 is the `@`; line 11 holds the closing brace.
    assert_eq!((span.file.as_str(), span.start_line, span.start_col, span.end_line, span.end_col), ("Configurations.mini", 4, 9, 11, 10));
}
