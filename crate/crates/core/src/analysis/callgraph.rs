//! Call graphs from entry methods and interprocedural dependency marking.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::lang::{ControlFlowGraph, Project, QualifiedName, StmtId};
use crate::slice::ElementId;

use super::dependency::{method_summary, MethodSummary, SummaryPolicy};
use super::AnalysisError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CallEdge {
    pub caller: ElementId,
    pub site: StmtId,
    pub callee: ElementId,
}

#[derive(Debug, Clone, Serialize)]
pub struct CallGraph {
    pub roots: Vec<ElementId>,
    pub nodes: BTreeSet<ElementId>,
    pub edges: Vec<CallEdge>,
    #[serde(skip)]
    cfgs: BTreeMap<ElementId, Arc<ControlFlowGraph>>,
}

impl PartialEq for CallGraph {
    fn eq(&self, other: &Self) -> bool {
        self.roots == other.roots && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl CallGraph {
    /// Methods reachable from `entries`, lowering only those.
    pub fn build(project: &Project, entries: &[ElementId]) -> Result<Self, AnalysisError> {
        let mut graph =
            CallGraph { roots: Vec::new(), nodes: BTreeSet::new(), edges: Vec::new(), cfgs: BTreeMap::new() };
        let mut queue = VecDeque::new();
        for entry in entries {
            if !project.index().is_method(entry) {
                return Err(AnalysisError::UnknownMethod(entry.clone()));
            }
            if !graph.roots.contains(entry) {
                graph.roots.push(entry.clone());
            }
            if graph.nodes.insert(entry.clone()) {
                queue.push_back(entry.clone());
            }
        }
        while let Some(method) = queue.pop_front() {
            let cfg = project.lower(&method)?;
            for (stmt, _, _) in cfg.call_sites() {
                let callee = project.resolve_call_target(stmt)?;
                graph.edges.push(CallEdge { caller: method.clone(), site: stmt.id, callee: callee.clone() });
                if graph.nodes.insert(callee.clone()) {
                    queue.push_back(callee);
                }
            }
            graph.cfgs.insert(method, cfg);
        }
        graph.edges.sort();
        Ok(graph)
    }

    pub fn cfg(&self, method: &ElementId) -> Option<&Arc<ControlFlowGraph>> {
        self.cfgs.get(method)
    }

    pub fn callees(&self, method: &ElementId) -> impl Iterator<Item = &CallEdge> {
        let method = method.clone();
        self.edges.iter().filter(move |e| e.caller == method)
    }

    pub fn label(&self, method: &ElementId) -> String {
        self.cfgs.get(method).map(|c| c.name.to_string()).unwrap_or_else(|| method.to_string())
    }

    /// Summaries of every node, iterated to a fixpoint so that return flow
    /// through callees (including recursive ones) is accounted for.
    pub fn summaries(&self) -> Result<BTreeMap<ElementId, MethodSummary>, AnalysisError> {
        let mut by_name: BTreeMap<QualifiedName, MethodSummary> = self
            .cfgs
            .values()
            .map(|c| (c.name.clone(), MethodSummary { method: c.name.clone(), ..MethodSummary::default() }))
            .collect();
        loop {
            let mut changed = false;
            for cfg in self.cfgs.values() {
                let summary = method_summary(cfg, &SummaryPolicy(&by_name))?;
                if by_name.get(&cfg.name) != Some(&summary) {
                    by_name.insert(cfg.name.clone(), summary);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(self.cfgs.iter().map(|(id, cfg)| (id.clone(), by_name[&cfg.name].clone())).collect())
    }

    pub fn to_dot(&self, emphasized: &BTreeSet<ElementId>) -> String {
        let mut out = String::from("digraph callgraph {\n  node [shape=box];\n");
        for node in &self.nodes {
            let mut attrs = format!("label=\"{}\"", self.label(node));
            if emphasized.contains(node) {
                attrs.push_str(", penwidth=3");
            }
            let _ = writeln!(out, "  \"{node}\" [{attrs}];");
        }
        for edge in &self.edges {
            let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"];", edge.caller, edge.callee, edge.site);
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self, emphasized: &BTreeSet<ElementId>) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .map(|n| {
                serde_json::json!({
                    "id": n,
                    "label": self.label(n),
                    "emphasized": emphasized.contains(n),
                })
            })
            .collect();
        serde_json::json!({ "roots": self.roots, "nodes": nodes, "edges": self.edges })
    }
}

/// Methods that receive a value derived from parameter `param` of `entry`,
/// propagated along call edges through method summaries.
pub fn interprocedural_dependency(
    cg: &CallGraph,
    entry: &ElementId,
    param: usize,
) -> Result<BTreeSet<ElementId>, AnalysisError> {
    if !cg.roots.contains(entry) {
        return Err(AnalysisError::UnknownMethod(entry.clone()));
    }
    let arity = cg.cfg(entry).map_or(0, |c| c.params.len());
    if param >= arity {
        return Err(AnalysisError::BadParamIndex { method: entry.clone(), index: param, arity });
    }
    let summaries = cg.summaries()?;
    let mut tainted: BTreeMap<ElementId, BTreeSet<usize>> = BTreeMap::new();
    tainted.entry(entry.clone()).or_default().insert(param);
    let mut worklist = VecDeque::from([entry.clone()]);
    while let Some(method) = worklist.pop_front() {
        let params = tainted[&method].clone();
        let summary = &summaries[&method];
        for (p, site, arg) in &summary.param_to_call_arg {
            if !params.contains(p) {
                continue;
            }
            let Some(edge) = cg.callees(&method).find(|e| e.site == *site) else { continue };
            if tainted.entry(edge.callee.clone()).or_default().insert(*arg) {
                worklist.push_back(edge.callee.clone());
            }
        }
    }
    Ok(tainted.into_iter().filter(|(_, ps)| !ps.is_empty()).map(|(m, _)| m).collect())
}
