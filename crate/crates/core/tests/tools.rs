use std::sync::Arc;

use pcw_core::lang::{Project, SpanTarget};
use pcw_core::tools::{run_tool_script, ActionKind, ActionOutcome, ToolContext, ToolError, ToolModel};
use pcw_testkit::corpus_dir;

const ENTRY: &str = "Configurations.ConfigurationController.CreateConfiguration";

fn ctx(variant: &str) -> ToolContext {
    ToolContext::new(Arc::new(Project::open(&corpus_dir(variant)).unwrap()))
}

#[test]
fn catalog_navigates_to_handler() {
    let ctx = ctx("buggy");
    let mut tool = run_tool_script(r#"{"tool": "apiEndpointCatalog"}"#, &ctx).unwrap();
    let ToolModel::Tree { items, .. } = tool.model().clone() else { panic!("tree expected") };
    assert_eq!(items.len(), 1);
    assert_eq!(items[0].label, "POST /configurations");
    let action = items[0].action.clone().unwrap();
    let handler = ctx.project.resolve_method(ENTRY).unwrap();
    let decl = ctx.project.source_span(&SpanTarget::Element(handler)).unwrap();
    match tool.apply(&action.id).unwrap() {
        ActionOutcome::Navigate(nav) => {
            assert_eq!(nav.span, decl);
            assert_eq!((nav.file.as_str(), nav.line), ("Configurations.mini", 4));
        }
        other => panic!("{other:?}"),
    }
    // Navigation leaves the model alone, so the id stays usable.
    assert!(tool.apply(&action.id).is_ok());
}

#[test]
fn explorer_expands_and_rejects_stale_ids() {
    let ctx = ctx("buggy");
    let script = format!(r#"{{"tool": "callGraphExplorer", "roots": ["{ENTRY}"]}}"#);
    let mut tool = run_tool_script(&script, &ctx).unwrap();
    let ToolModel::Graph { nodes, edges, pending_actions, version } = tool.model().clone() else { panic!() };
    assert_eq!((version, nodes.len(), edges.len()), (1, 1, 0));
    let expand = pending_actions.values().next().unwrap().clone();
    assert!(matches!(expand.kind, ActionKind::Expand { .. }));
    let ActionOutcome::Model(ToolModel::Graph { nodes, edges, version, .. }) = tool.apply(&expand.id).unwrap() else {
        panic!()
    };
    assert_eq!((version, nodes.len(), edges.len()), (2, 3, 2));
    assert!(matches!(tool.apply(&expand.id), Err(ToolError::StaleAction(_))));
}

#[test]
fn emphasis_marks_the_whole_chain() {
    let ctx = ctx("buggy");
    let script = format!(r#"{{"tool": "callGraphExplorer", "roots": ["{ENTRY}"], "emphasize": {{"param": 0}}}}"#);
    let tool = run_tool_script(&script, &ctx).unwrap();
    let ToolModel::Graph { nodes, edges, .. } = tool.model() else { panic!() };
    assert_eq!(nodes.len(), 3);
    assert_eq!(edges.len(), 2);
    assert!(nodes.iter().all(|n| n.emphasized));
    let dot = tool.export("dot").unwrap();
    assert_eq!(dot.matches("penwidth=3").count(), 3);
    assert_eq!(dot, tool.export("dot").unwrap());
}

#[test]
fn structure_browser_collapses_and_exports() {
    let ctx = ctx("fixed");
    let mut tool = run_tool_script(r#"{"tool": "structureBrowser"}"#, &ctx).unwrap();
    let ToolModel::Tree { items, .. } = tool.model().clone() else { panic!() };
    assert_eq!(items.len(), 1);
    let names: Vec<&str> = items[0].children.iter().map(|c| c.label.as_str()).collect();
    assert_eq!(names, ["Configurations", "Storage", "Validation"]);
    let collapse = items[0].action.clone().unwrap();
    let ActionOutcome::Model(ToolModel::Tree { items, .. }) = tool.apply(&collapse.id).unwrap() else { panic!() };
    assert!(items[0].children.is_empty());
    assert!(matches!(tool.export("dot"), Err(ToolError::UnsupportedFormat { .. })));
    assert!(tool.export("json").unwrap().contains("\"type\": \"tree\""));
}

#[test]
fn reachability_inspector_lists_witnesses() {
    let ctx = ctx("buggy");
    let script = format!(
        r#"{{"tool": "reachabilityInspector", "method": "{ENTRY}",
            "target": "call:Storage.Twin.CreateDeviceTwinConfiguration",
            "constraints": ["name !~ \"[0-9a-z]([0-9a-z-]{{0,62}}[0-9a-z])?\""]}}"#
    );
    let tool = run_tool_script(&script, &ctx).unwrap();
    let ToolModel::Tree { items, .. } = tool.model() else { panic!() };
    assert_eq!(items[0].label, "Status: Reachable");
    assert_eq!(items[1].children[0].label, "name = \"-\"");
}

#[test]
fn script_errors_are_typed() {
    let ctx = ctx("buggy");
    assert!(matches!(run_tool_script("{\"tool\": ", &ctx), Err(ToolError::ScriptSyntaxError { line: 1, .. })));
    assert!(matches!(run_tool_script(r#"{"tool": "nope"}"#, &ctx), Err(ToolError::UnknownTool(_))));
    assert!(matches!(
        run_tool_script(r#"{"tool": "callGraphExplorer", "roots": []}"#, &ctx),
        Err(ToolError::ParamValidation(_))
    ));
    assert!(matches!(
        run_tool_script(r#"{"tool": "callGraphExplorer", "roots": ["No.Such.Method"]}"#, &ctx),
        Err(ToolError::ParamValidation(_))
    ));
}
