//! Reachability of a program position under parameter and return constraints.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::lang::{Project, Type};
use crate::slice::ElementId;

use super::constraint::{to_constraint, Constraint, IntExpr, Model, SymExpr, Value};
use super::explore::{explore_paths, Bounds, ExploreOptions, Target};
use super::solver::{check_sat, SatResult, SolverConfig};
use super::syntax::{conjuncts, RETURN_SYMBOL};
use super::SymexecError;

pub const DEFAULT_MAX_MODELS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReachStatus {
    Reachable,
    ProvenUnreachable,
    InconclusiveBudget,
}

impl ReachStatus {
    pub fn label(self) -> &'static str {
        match self {
            ReachStatus::Reachable => "Reachable",
            ReachStatus::ProvenUnreachable => "ProvenUnreachable",
            ReachStatus::InconclusiveBudget => "InconclusiveBudget",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReachQuery {
    pub method: ElementId,
    pub target: Target,
    /// Boolean expressions over the method's parameters.
    pub param_constraints: Vec<SymExpr>,
    /// Boolean expression over [`RETURN_SYMBOL`] and the parameters.
    pub return_constraint: Option<SymExpr>,
    pub bounds: Bounds,
    pub solver: SolverConfig,
    pub max_models: usize,
}

impl ReachQuery {
    pub fn new(method: ElementId, target: Target) -> Self {
        ReachQuery {
            method,
            target,
            param_constraints: Vec::new(),
            return_constraint: None,
            bounds: Bounds::default(),
            solver: SolverConfig::default(),
            max_models: DEFAULT_MAX_MODELS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReachReport {
    pub status: ReachStatus,
    pub models: Vec<Model>,
    pub truncated: bool,
    pub paths_explored: usize,
    /// Why individual reaching paths were inconclusive.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<String>,
}

/// Symbols a query may mention: parameters, plus `ret` for non-void methods.
pub fn query_symbols(project: &Project, method: &ElementId, with_return: bool) -> Result<BTreeMap<String, Type>, SymexecError> {
    let cfg = project.lower(method)?;
    let mut symbols: BTreeMap<String, Type> = cfg.params.iter().cloned().collect();
    if with_return {
        if let Some(ret) = cfg.ret {
            if symbols.insert(RETURN_SYMBOL.into(), ret).is_some() {
                return Err(SymexecError::BadConstraint(format!("parameter `{RETURN_SYMBOL}` shadows the return value")));
            }
        }
    }
    Ok(symbols)
}

fn check_symbols(e: &SymExpr, allowed: &BTreeMap<String, Type>) -> Result<(), SymexecError> {
    let mut used = BTreeMap::new();
    e.symbols(&mut used);
    for (name, ty) in used {
        match allowed.get(&name) {
            Some(t) if *t == ty => {}
            Some(t) => return Err(SymexecError::BadConstraint(format!("`{name}` is {t}, used as {ty}"))),
            None => return Err(SymexecError::BadConstraint(format!("`{name}` is not a parameter of the method"))),
        }
    }
    Ok(())
}

/// Excludes `model`'s value of `symbol` from later solutions.
fn blocking(symbol: &str, value: &Value) -> Constraint {
    match value {
        Value::Int(v) => Constraint::IntCmp {
            op: super::constraint::CmpOp::Ne,
            lhs: IntExpr::Var(symbol.into()),
            rhs: IntExpr::Const(v.clone()),
        },
        Value::Bool(b) => Constraint::BoolAtom { symbol: symbol.into(), expected: !b },
        Value::Str(s) => Constraint::StrEq { symbol: symbol.into(), literal: s.clone(), positive: false },
    }
}

pub fn analyze_reachability(project: &Project, query: &ReachQuery) -> Result<ReachReport, SymexecError> {
    let cfg = project.lower(&query.method)?;
    let params: BTreeMap<String, Type> = cfg.params.iter().cloned().collect();
    let mut assumptions = Vec::new();
    for c in &query.param_constraints {
        check_symbols(c, &params)?;
        assumptions.extend(conjuncts(c.clone()).iter().map(|e| to_constraint(e, true)));
    }
    if let Some(rc) = &query.return_constraint {
        if cfg.ret.is_none() {
            return Err(SymexecError::BadConstraint("a void method has no return value".into()));
        }
        check_symbols(rc, &query_symbols(project, &query.method, true)?)?;
    }

    let exploration = explore_paths(
        project,
        &query.method,
        ExploreOptions {
            bounds: query.bounds,
            target: query.target.clone(),
            assumptions: &assumptions,
            continue_to_return: query.return_constraint.is_some(),
            solver: &query.solver,
        },
    )?;

    let mut models: Vec<Model> = Vec::new();
    let mut unknown = Vec::new();
    let mut any_sat = false;
    for path in exploration.paths.iter().filter(|p| p.reached) {
        let mut constraints = assumptions.clone();
        constraints.extend(path.condition.constraints.iter().cloned());
        if let Some(rc) = &query.return_constraint {
            let Some(value) = &path.returned else { continue };
            let substituted = rc.substitute(RETURN_SYMBOL, value);
            constraints.extend(conjuncts(substituted).iter().map(|e| to_constraint(e, true)));
        }
        loop {
            if models.len() >= query.max_models {
                break;
            }
            match check_sat(&constraints, &query.solver) {
                SatResult::Sat(model) => {
                    any_sat = true;
                    let mut model: Model = model.into_iter().filter(|(k, _)| params.contains_key(k)).collect();
                    for (name, ty) in &params {
                        model.entry(name.clone()).or_insert_with(|| Value::default_of(*ty));
                    }
                    let block = constraints
                        .iter()
                        .flat_map(|c| c.symbols().into_keys())
                        .find(|s| params.contains_key(s))
                        .map(|s| blocking(&s, &model[&s]));
                    if !models.contains(&model) {
                        models.push(model);
                    }
                    match block {
                        Some(b) => constraints.push(b),
                        None => break,
                    }
                }
                SatResult::Unsat => break,
                SatResult::Unknown(reason) => {
                    if !any_sat {
                        unknown.push(reason);
                    }
                    break;
                }
            }
        }
        if models.len() >= query.max_models {
            break;
        }
    }

    let status = if any_sat {
        ReachStatus::Reachable
    } else if exploration.truncated || !unknown.is_empty() {
        ReachStatus::InconclusiveBudget
    } else {
        ReachStatus::ProvenUnreachable
    };
    Ok(ReachReport { status, models, truncated: exploration.truncated, paths_explored: exploration.paths.len(), unknown })
}
