//! Incrementally expanded call-graph view with dependency emphasis.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use crate::analysis::{interprocedural_dependency, AnalysisError, CallGraph};
use crate::slice::ElementId;

use super::{ActionKind, ActionTable, GraphEdge, GraphNode, Handled, ToolError, ToolModel};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExplorerOptions {
    pub emphasize_entry: Option<ElementId>,
    pub emphasize_param: Option<usize>,
    /// Nodes shown expanded initially, when visible.
    pub pre_expand: BTreeSet<ElementId>,
}

#[derive(Clone)]
pub struct CallGraphExplorer {
    graph: Arc<CallGraph>,
    emphasized: BTreeSet<ElementId>,
    expanded: BTreeSet<ElementId>,
}

impl CallGraphExplorer {
    pub fn new(graph: Arc<CallGraph>, options: ExplorerOptions) -> Result<Self, ToolError> {
        let emphasized = match (&options.emphasize_entry, options.emphasize_param) {
            (None, None) => BTreeSet::new(),
            (None, Some(_)) => return Err(ToolError::BadOption("emphasizeParam requires emphasizeEntry".into())),
            (Some(_), None) => return Err(ToolError::BadOption("emphasizeEntry requires emphasizeParam".into())),
            (Some(entry), Some(param)) => match interprocedural_dependency(&graph, entry, param) {
                Ok(set) => set,
                Err(AnalysisError::UnknownMethod(m)) => {
                    return Err(ToolError::BadOption(format!("`{m}` is not a root of the call graph")))
                }
                Err(e @ AnalysisError::BadParamIndex { .. }) => return Err(ToolError::BadOption(e.to_string())),
                Err(e) => return Err(e.into()),
            },
        };
        if let Some(unknown) = options.pre_expand.iter().find(|n| !graph.nodes.contains(*n)) {
            return Err(ToolError::BadOption(format!("`{unknown}` is not in the call graph")));
        }
        let mut explorer = CallGraphExplorer { graph, emphasized, expanded: options.pre_expand };
        explorer.prune();
        Ok(explorer)
    }

    pub fn graph(&self) -> &CallGraph {
        &self.graph
    }

    pub fn emphasized(&self) -> &BTreeSet<ElementId> {
        &self.emphasized
    }

    /// Roots plus callees of visible expanded nodes, in discovery order.
    fn visible(&self) -> (Vec<ElementId>, Vec<GraphEdge>) {
        let mut seen: BTreeSet<ElementId> = BTreeSet::new();
        let mut order = Vec::new();
        let mut edges = Vec::new();
        let mut queue: VecDeque<ElementId> = VecDeque::new();
        for r in &self.graph.roots {
            if seen.insert(r.clone()) {
                order.push(r.clone());
                queue.push_back(r.clone());
            }
        }
        while let Some(n) = queue.pop_front() {
            if !self.expanded.contains(&n) {
                continue;
            }
            for e in self.graph.callees(&n) {
                edges.push(GraphEdge { source: e.caller.clone(), target: e.callee.clone(), kind: "calls".into() });
                if seen.insert(e.callee.clone()) {
                    order.push(e.callee.clone());
                    queue.push_back(e.callee.clone());
                }
            }
        }
        (order, edges)
    }

    /// Drops expansion state of nodes that are no longer visible.
    fn prune(&mut self) {
        loop {
            let (visible, _) = self.visible();
            let visible: BTreeSet<ElementId> = visible.into_iter().collect();
            let before = self.expanded.len();
            self.expanded.retain(|n| visible.contains(n));
            if self.expanded.len() == before {
                return;
            }
        }
    }

    pub(crate) fn expand_all(&mut self, nodes: BTreeSet<ElementId>) {
        self.expanded.extend(nodes);
        self.prune();
    }

    fn has_callees(&self, n: &ElementId) -> bool {
        self.graph.callees(n).next().is_some()
    }

    pub(crate) fn render(&self, version: u64, table: &mut ActionTable) -> ToolModel {
        let (order, edges) = self.visible();
        let mut pending_actions = BTreeMap::new();
        let nodes = order
            .iter()
            .map(|n| {
                let expandable = self.has_callees(n) && !self.expanded.contains(n);
                if expandable {
                    pending_actions.insert(n.clone(), table.register(ActionKind::Expand { node: n.clone() }));
                } else if self.has_callees(n) {
                    pending_actions.insert(n.clone(), table.register(ActionKind::Collapse { node: n.clone() }));
                }
                GraphNode { id: n.clone(), label: self.graph.label(n), emphasized: self.emphasized.contains(n), expandable }
            })
            .collect();
        ToolModel::Graph { version, nodes, edges, pending_actions }
    }

    pub(crate) fn handle(&mut self, action: &ActionKind) -> Result<Handled, ToolError> {
        match action {
            ActionKind::Expand { node } => {
                self.expanded.insert(node.clone());
            }
            ActionKind::Collapse { node } => {
                self.expanded.remove(node);
                self.prune();
            }
            _ => return Err(ToolError::BadOption("unsupported action for the call-graph explorer".into())),
        }
        Ok(Handled::Changed)
    }
}
