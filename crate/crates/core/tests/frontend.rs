use pcw_core::lang::{FrontendError, Project, Severity, CALLS, METHOD};
use pcw_testkit::corpus_dir;

fn sources(text: &str) -> Result<Project, FrontendError> {
    Project::from_sources("t", vec![("a.mini".into(), text.into())])
}

#[test]
fn corpus_facts() {
    let project = Project::open(&corpus_dir("buggy")).unwrap();
    assert_eq!(project.name(), "buggy");
    assert!(project.forest().diagnostics.is_empty());
    let slice = project.full_slice().unwrap();
    assert_eq!(slice.query_elements(Some(METHOD), None).len(), 4);
    assert_eq!(slice.query_links(Some(CALLS), None, None).len(), 2);
    slice.check_closure().unwrap();
    // Building the slice does not lower anything.
    assert!(project.lowering_counts().is_empty());
}

#[test]
fn syntax_errors_carry_positions() {
    let err = sources("namespace N {\n  class C {\n    fn f( -> int { return 1; }\n  }\n}\n").unwrap_err();
    let FrontendError::InvalidForest(diags) = err else { panic!("{err:?}") };
    assert!(!diags.is_empty());
    assert_eq!((diags[0].file.as_str(), diags[0].line, diags[0].severity), ("a.mini", 3, Severity::Error));
}

#[test]
fn type_errors_surface_on_lowering() {
    let project = sources("namespace N { class C { fn f(x: int) -> int { return x + \"s\"; } } }").unwrap();
    let id = project.resolve_method("N.C.f").unwrap();
    assert!(matches!(project.lower(&id), Err(FrontendError::TypeError { .. })));
}

#[test]
fn unresolved_calls_are_reported() {
    let project = sources("namespace N { class C { fn f() -> int { return M.D.g(); } } }").unwrap();
    let id = project.resolve_method("N.C.f").unwrap();
    assert!(matches!(project.lower(&id), Err(FrontendError::UnresolvedCall { .. })));
}

#[test]
fn missing_directory_and_empty_project() {
    let dir = std::env::temp_dir().join(format!("pcw-empty-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    assert!(matches!(Project::open(&dir), Err(FrontendError::EmptyProject(_))));
    assert!(matches!(Project::open(&dir.join("absent")), Err(FrontendError::Io { .. })));
}

#[test]
fn source_lines_are_clamped() {
    let project = Project::open(&corpus_dir("fixed")).unwrap();
    let text = project.source_lines("Storage.mini", Some(4), Some(5)).unwrap();
    assert_eq!(text, "        fn CreateDeviceTwinConfiguration(name: string) -> int {\n            let size = len(name);");
    assert_eq!(project.source_lines("Storage.mini", Some(100), None).unwrap(), "");
    assert!(project.source_lines("Nope.mini", None, None).is_none());
}

#[test]
fn extraction_is_stable_for_unchanged_sources() {
    let a = Project::open(&corpus_dir("buggy")).unwrap();
    let b = Project::open(&corpus_dir("buggy")).unwrap();
    let first = pcw_core::slice::to_json(&a.full_slice().unwrap());
    assert_eq!(first, pcw_core::slice::to_json(&b.full_slice().unwrap()));
    assert_eq!(first, pcw_core::slice::to_json(&a.full_slice().unwrap()));
    assert_eq!(pcw_core::slice::to_dot(&a.full_slice().unwrap(), None), pcw_core::slice::to_dot(&b.full_slice().unwrap(), None));
}
