//! Reachability query results as a tree of witnesses.

use std::sync::Arc;

use serde::Deserialize;

use crate::lang::{Project, StmtId};
use crate::symexec::{
    analyze_reachability, parse_constraint, query_symbols, Bounds, ReachQuery, ReachReport, ReachStatus,
    SolverConfig, SymexecError, Target,
};

use super::{ActionKind, ActionTable, Handled, ToolError, TreeItem};

/// A reachability query in its textual form, as scripts and the CLI give it.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ReachabilityRequest {
    /// Qualified method name.
    pub method: String,
    /// `call:<QName>`, `stmt:<id>` or `return`.
    pub target: String,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub return_constraint: Option<String>,
    #[serde(default)]
    pub bounds: Option<Bounds>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QueryError {
    #[error(transparent)]
    Symexec(#[from] SymexecError),
    #[error("bad target `{0}`: expected call:<method>, stmt:<id> or return")]
    BadTarget(String),
}

impl From<crate::lang::FrontendError> for QueryError {
    fn from(e: crate::lang::FrontendError) -> Self {
        QueryError::Symexec(e.into())
    }
}

/// Resolves a textual target relative to the analyzed method.
pub fn parse_target(project: &Project, method: &crate::slice::ElementId, text: &str) -> Result<Target, QueryError> {
    let bad = || QueryError::BadTarget(text.to_string());
    if text == "return" {
        return Ok(Target::Return);
    }
    match text.split_once(':') {
        Some(("call", name)) => Ok(Target::CallTo { method: project.resolve_method(name.trim())? }),
        Some(("stmt", id)) => {
            let id: u32 = id.trim().parse().map_err(|_| bad())?;
            let cfg = project.lower(method)?;
            if cfg.site(StmtId(id)).is_none() {
                return Err(bad());
            }
            Ok(Target::Stmt { method: method.clone(), stmt: StmtId(id) })
        }
        _ => Err(bad()),
    }
}

impl ReachabilityRequest {
    pub fn to_query(&self, project: &Project, solver: &SolverConfig, bounds: Bounds) -> Result<ReachQuery, QueryError> {
        let method = project.resolve_method(&self.method)?;
        let target = parse_target(project, &method, &self.target)?;
        let params = query_symbols(project, &method, false)?;
        let mut query = ReachQuery::new(method.clone(), target);
        for c in &self.constraints {
            query.param_constraints.push(parse_constraint(c, &params)?);
        }
        if let Some(rc) = &self.return_constraint {
            let symbols = query_symbols(project, &method, true)?;
            query.return_constraint = Some(parse_constraint(rc, &symbols)?);
        }
        query.bounds = self.bounds.unwrap_or(bounds);
        query.solver = solver.clone();
        Ok(query)
    }
}

#[derive(Clone)]
pub struct ReachabilityInspector {
    project: Arc<Project>,
    request: ReachabilityRequest,
    solver: SolverConfig,
    bounds: Bounds,
    result: Result<ReachReport, String>,
}

impl ReachabilityInspector {
    pub fn new(project: Arc<Project>, request: ReachabilityRequest, solver: SolverConfig, bounds: Bounds) -> Self {
        let mut inspector = ReachabilityInspector { project, request, solver, bounds, result: Err(String::new()) };
        inspector.run();
        inspector
    }

    fn run(&mut self) {
        self.result = self
            .request
            .to_query(&self.project, &self.solver, self.bounds)
            .and_then(|q| analyze_reachability(&self.project, &q).map_err(QueryError::from))
            .map_err(|e| e.to_string());
    }

    pub fn report(&self) -> Result<&ReachReport, &str> {
        self.result.as_ref().map_err(String::as_str)
    }

    pub(crate) fn render(&self, table: &mut ActionTable) -> Vec<TreeItem> {
        let report = match &self.result {
            Err(message) => return vec![TreeItem::leaf(format!("Error: {message}"))],
            Ok(r) => r,
        };
        let mut items = vec![TreeItem::leaf(format!("Status: {}", report.status.label()))];
        for (i, model) in report.models.iter().enumerate() {
            let mut item = TreeItem::leaf(format!("Witness {}", i + 1));
            item.children = model.iter().map(|(k, v)| TreeItem::leaf(format!("{k} = {v}"))).collect();
            items.push(item);
        }
        if report.status == ReachStatus::InconclusiveBudget {
            let mut retry = TreeItem::leaf("Retry with doubled bounds");
            retry.action = Some(table.register(ActionKind::RunQuery { query: "doubleBounds".into() }));
            items.push(retry);
        }
        items
    }

    pub(crate) fn handle(&mut self, action: &ActionKind) -> Result<Handled, ToolError> {
        match action {
            ActionKind::RunQuery { query } if query == "doubleBounds" => {
                let b = self.request.bounds.unwrap_or(self.bounds);
                self.request.bounds = Some(Bounds {
                    loop_unroll: b.loop_unroll.saturating_mul(2),
                    max_paths: b.max_paths.saturating_mul(2),
                    inline_depth: b.inline_depth.saturating_mul(2),
                });
                self.run();
                Ok(Handled::Changed)
            }
            _ => Err(ToolError::BadOption("unsupported action for the reachability inspector".into())),
        }
    }
}
