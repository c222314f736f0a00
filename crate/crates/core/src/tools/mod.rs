//! Tool controllers over UI-agnostic tree and graph models.
//!
//! A [`ToolInstance`] owns one controller and its current model. Every
//! action in a model has an id of the form `"{version}.{n}"`; the ids stay
//! valid until an action replaces the model.

mod callgraph;
mod catalog;
mod reachability;
mod script;
mod structure;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::lang::{FrontendError, SourceSpan};
use crate::slice::{AttrValue, Element, ElementId, SliceError};

pub use callgraph::{CallGraphExplorer, ExplorerOptions};
pub use catalog::EndpointCatalog;
pub use reachability::{parse_target, QueryError, ReachabilityInspector, ReachabilityRequest};
pub use script::{run_tool_script, ToolContext};
pub use structure::StructureBrowser;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToolError {
    #[error("the slice is empty")]
    EmptySlice,
    #[error("bad option: {0}")]
    BadOption(String),
    #[error("action `{0}` is not part of the current model")]
    StaleAction(String),
    #[error("format `{format}` is not supported for {tool}")]
    UnsupportedFormat { format: String, tool: &'static str },
    #[error("script syntax error at line {line}, column {column}: {message}")]
    ScriptSyntaxError { line: usize, column: usize, message: String },
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("invalid parameters: {0}")]
    ParamValidation(String),
    #[error(transparent)]
    Slice(#[from] SliceError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ActionKind {
    Navigate { file: String, line: u32, span: SourceSpan },
    Expand { node: ElementId },
    Collapse { node: ElementId },
    RunQuery { query: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Action {
    pub id: String,
    #[serde(flatten)]
    pub kind: ActionKind,
}

/// Host request to show a source location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NavigationRequest {
    pub file: String,
    pub line: u32,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TreeItem {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element_id: Option<ElementId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<Action>,
    pub children: Vec<TreeItem>,
}

impl TreeItem {
    pub fn leaf(label: impl Into<String>) -> Self {
        TreeItem { label: label.into(), element_id: None, kind: None, action: None, children: Vec::new() }
    }

    /// Depth-first iteration over this item and its descendants.
    pub fn walk(&self) -> Vec<&TreeItem> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphNode {
    pub id: ElementId,
    pub label: String,
    pub emphasized: bool,
    pub expandable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphEdge {
    pub source: ElementId,
    pub target: ElementId,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ToolModel {
    #[serde(rename_all = "camelCase")]
    Tree { version: u64, items: Vec<TreeItem> },
    #[serde(rename_all = "camelCase")]
    Graph {
        version: u64,
        nodes: Vec<GraphNode>,
        edges: Vec<GraphEdge>,
        pending_actions: BTreeMap<ElementId, Action>,
    },
}

impl ToolModel {
    pub fn version(&self) -> u64 {
        match self {
            ToolModel::Tree { version, .. } | ToolModel::Graph { version, .. } => *version,
        }
    }

    /// Every action in the model, in document order.
    pub fn actions(&self) -> Vec<&Action> {
        match self {
            ToolModel::Tree { items, .. } => {
                items.iter().flat_map(|i| i.walk()).filter_map(|i| i.action.as_ref()).collect()
            }
            ToolModel::Graph { pending_actions, .. } => pending_actions.values().collect(),
        }
    }
}

/// Hands out action ids for one model version.
pub struct ActionTable {
    version: u64,
    actions: BTreeMap<String, ActionKind>,
}

impl ActionTable {
    fn new(version: u64) -> Self {
        ActionTable { version, actions: BTreeMap::new() }
    }

    pub fn register(&mut self, kind: ActionKind) -> Action {
        let id = format!("{}.{}", self.version, self.actions.len() + 1);
        self.actions.insert(id.clone(), kind.clone());
        Action { id, kind }
    }
}

pub(crate) enum Handled {
    Changed,
    Navigate(NavigationRequest),
}

#[derive(Clone)]
pub enum Controller {
    Structure(StructureBrowser),
    CallGraph(CallGraphExplorer),
    Catalog(EndpointCatalog),
    Reachability(Box<ReachabilityInspector>),
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Structure(_) => "structureBrowser",
            Controller::CallGraph(_) => "callGraphExplorer",
            Controller::Catalog(_) => "apiEndpointCatalog",
            Controller::Reachability(_) => "reachabilityInspector",
        }
    }

    fn render(&self, table: &mut ActionTable) -> ToolModel {
        let version = table.version;
        match self {
            Controller::Structure(c) => ToolModel::Tree { version, items: c.render(table) },
            Controller::Catalog(c) => ToolModel::Tree { version, items: c.render(table) },
            Controller::Reachability(c) => ToolModel::Tree { version, items: c.render(table) },
            Controller::CallGraph(c) => c.render(version, table),
        }
    }

    fn handle(&mut self, action: &ActionKind) -> Result<Handled, ToolError> {
        if let ActionKind::Navigate { file, line, span } = action {
            return Ok(Handled::Navigate(NavigationRequest { file: file.clone(), line: *line, span: span.clone() }));
        }
        match self {
            Controller::Structure(c) => c.handle(action),
            Controller::CallGraph(c) => c.handle(action),
            Controller::Catalog(_) => Err(ToolError::BadOption("the catalog has no stateful actions".into())),
            Controller::Reachability(c) => c.handle(action),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ActionOutcome {
    Model(ToolModel),
    Navigate(NavigationRequest),
}

/// One controller and its current model.
#[derive(Clone)]
pub struct ToolInstance {
    controller: Controller,
    model: ToolModel,
    actions: BTreeMap<String, ActionKind>,
}

impl ToolInstance {
    pub fn new(controller: Controller) -> Self {
        let mut table = ActionTable::new(1);
        let model = controller.render(&mut table);
        ToolInstance { controller, model, actions: table.actions }
    }

    pub fn tool(&self) -> &'static str {
        self.controller.name()
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn model(&self) -> &ToolModel {
        &self.model
    }

    pub fn apply(&mut self, action_id: &str) -> Result<ActionOutcome, ToolError> {
        let kind = self.actions.get(action_id).cloned().ok_or_else(|| ToolError::StaleAction(action_id.to_string()))?;
        match self.controller.handle(&kind)? {
            Handled::Navigate(request) => Ok(ActionOutcome::Navigate(request)),
            Handled::Changed => {
                let mut table = ActionTable::new(self.model.version() + 1);
                self.model = self.controller.render(&mut table);
                self.actions = table.actions;
                Ok(ActionOutcome::Model(self.model.clone()))
            }
        }
    }

    /// `json` for any tool; `dot` for graph models only.
    pub fn export(&self, format: &str) -> Result<String, ToolError> {
        match (format, &self.model) {
            ("json", model) => Ok(serde_json::to_string_pretty(model).expect("model serializes")),
            ("dot", ToolModel::Graph { nodes, edges, .. }) => Ok(graph_dot(nodes, edges)),
            _ => Err(ToolError::UnsupportedFormat { format: format.to_string(), tool: self.tool() }),
        }
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn graph_dot(nodes: &[GraphNode], edges: &[GraphEdge]) -> String {
    let mut out = String::from("digraph tool {\n  node [shape=box];\n");
    for n in nodes {
        let mut attrs = format!("label=\"{}\"", dot_escape(&n.label));
        if n.emphasized {
            attrs.push_str(", penwidth=3");
        }
        if n.expandable {
            attrs.push_str(", style=dashed");
        }
        out.push_str(&format!("  \"{}\" [{attrs}];\n", dot_escape(n.id.as_str())));
    }
    for e in edges {
        out.push_str(&format!("  \"{}\" -> \"{}\";\n", dot_escape(e.source.as_str()), dot_escape(e.target.as_str())));
    }
    out.push_str("}\n");
    out
}

/// Declaration span recorded in an element's attributes.
pub fn element_span(element: &Element) -> Option<SourceSpan> {
    let int = |k: &str| element.attr(k).and_then(AttrValue::as_integer).and_then(|v| u32::try_from(v).ok());
    Some(SourceSpan {
        file: element.attr("file").and_then(AttrValue::as_text)?.to_string(),
        start_line: int("startLine")?,
        start_col: int("startCol")?,
        end_line: int("endLine")?,
        end_col: int("endCol")?,
    })
}

pub(crate) fn navigate(span: SourceSpan) -> ActionKind {
    ActionKind::Navigate { file: span.file.clone(), line: span.start_line, span }
}
