//! Def-use dependency closure and per-method flow summaries.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::lang::cfg::{Expr, StmtKind};
use crate::lang::{ControlFlowGraph, QualifiedName, StmtId, TerminatorKind, Var};

use super::reaching::{DefSite, DefUse, ReachingDefinitions};
use super::AnalysisError;

/// What a dependency closure starts from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seed {
    Param(usize),
    Var(Var),
}

/// Whether a call's result depends on its arguments.
pub trait CallPolicy {
    fn result_depends(&self, callee: &QualifiedName, tainted_args: &BTreeSet<usize>) -> bool;
}

/// Any tainted argument taints the result.
#[derive(Debug, Clone, Copy, Default)]
pub struct Conservative;

impl CallPolicy for Conservative {
    fn result_depends(&self, _: &QualifiedName, tainted_args: &BTreeSet<usize>) -> bool {
        !tainted_args.is_empty()
    }
}

/// Uses callee summaries; unknown callees fall back to [`Conservative`].
pub struct SummaryPolicy<'a>(pub &'a BTreeMap<QualifiedName, MethodSummary>);

impl CallPolicy for SummaryPolicy<'_> {
    fn result_depends(&self, callee: &QualifiedName, tainted_args: &BTreeSet<usize>) -> bool {
        match self.0.get(callee) {
            Some(summary) => summary.param_to_return.iter().any(|p| tainted_args.contains(p)),
            None => !tainted_args.is_empty(),
        }
    }
}

/// Result of propagating taint through one method.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Taint {
    /// Statements and terminators reading a tainted value.
    pub stmts: BTreeSet<StmtId>,
    pub defs: BTreeSet<(Var, DefSite)>,
    /// Tainted argument positions per call statement.
    pub call_args: BTreeMap<StmtId, BTreeSet<usize>>,
}

fn expr_tainted(def_use: &DefUse, taint: &BTreeSet<(Var, DefSite)>, site: StmtId, expr: &Expr) -> bool {
    expr.vars().into_iter().any(|var| {
        def_use
            .reaching(site, var)
            .is_some_and(|sites| sites.iter().any(|s| taint.contains(&(var.clone(), *s))))
    })
}

/// Forward def-use propagation from the seed definitions to a fixpoint.
pub fn propagate(
    cfg: &ControlFlowGraph,
    def_use: &DefUse,
    seeds: BTreeSet<(Var, DefSite)>,
    policy: &dyn CallPolicy,
) -> Taint {
    let mut taint = Taint { defs: seeds, ..Taint::default() };
    loop {
        let before = taint.defs.len();
        for block in &cfg.blocks {
            for stmt in &block.stmts {
                match &stmt.kind {
                    StmtKind::Assign { target, value } => {
                        if expr_tainted(def_use, &taint.defs, stmt.id, value) {
                            taint.stmts.insert(stmt.id);
                            taint.defs.insert((target.clone(), DefSite::Stmt(stmt.id)));
                        }
                    }
                    StmtKind::Call { target, callee, args } => {
                        let tainted: BTreeSet<usize> = args
                            .iter()
                            .enumerate()
                            .filter(|(_, a)| expr_tainted(def_use, &taint.defs, stmt.id, a))
                            .map(|(i, _)| i)
                            .collect();
                        if tainted.is_empty() {
                            continue;
                        }
                        taint.stmts.insert(stmt.id);
                        if let Some(target) = target {
                            if policy.result_depends(callee, &tainted) {
                                taint.defs.insert((target.clone(), DefSite::Stmt(stmt.id)));
                            }
                        }
                        taint.call_args.insert(stmt.id, tainted);
                    }
                }
            }
            let term = &block.terminator;
            let read = match &term.kind {
                TerminatorKind::Branch { cond, .. } => Some(cond),
                TerminatorKind::Return(value) => value.as_ref(),
                TerminatorKind::Jump(_) => None,
            };
            if read.is_some_and(|e| expr_tainted(def_use, &taint.defs, term.id, e)) {
                taint.stmts.insert(term.id);
            }
        }
        if taint.defs.len() == before {
            return taint;
        }
    }
}

fn seed_defs(cfg: &ControlFlowGraph, seed: &Seed) -> Result<BTreeSet<(Var, DefSite)>, AnalysisError> {
    match seed {
        Seed::Param(i) => {
            let var = cfg.param_var(*i).ok_or_else(|| AnalysisError::UnknownSeed(format!("parameter {i}")))?;
            Ok([(var, DefSite::Param(*i))].into())
        }
        Seed::Var(var) => {
            if !cfg.var_types.contains_key(var) {
                return Err(AnalysisError::UnknownSeed(var.to_string()));
            }
            let mut defs: BTreeSet<(Var, DefSite)> = cfg
                .statements()
                .filter(|s| s.def() == Some(var))
                .map(|s| (var.clone(), DefSite::Stmt(s.id)))
                .collect();
            if let Some(i) = cfg.param_index(var) {
                defs.insert((var.clone(), DefSite::Param(i)));
            }
            Ok(defs)
        }
    }
}

/// Statements whose computed value depends on the seed through assignments
/// and operands. Control dependence is not followed.
pub fn dependency_closure(
    cfg: &ControlFlowGraph,
    seed: &Seed,
    policy: &dyn CallPolicy,
) -> Result<BTreeSet<StmtId>, AnalysisError> {
    let seeds = seed_defs(cfg, seed)?;
    let def_use = DefUse::build(cfg, ReachingDefinitions::default())?;
    Ok(propagate(cfg, &def_use, seeds, policy).stmts)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodSummary {
    pub method: QualifiedName,
    pub param_to_return: BTreeSet<usize>,
    /// `(param, call site, argument index)`.
    pub param_to_call_arg: BTreeSet<(usize, StmtId, usize)>,
}

pub fn method_summary(cfg: &ControlFlowGraph, policy: &dyn CallPolicy) -> Result<MethodSummary, AnalysisError> {
    let def_use = DefUse::build(cfg, ReachingDefinitions::default())?;
    let returns: BTreeSet<StmtId> = cfg
        .blocks
        .iter()
        .filter(|b| matches!(b.terminator.kind, TerminatorKind::Return(Some(_))))
        .map(|b| b.terminator.id)
        .collect();
    let mut summary = MethodSummary { method: cfg.name.clone(), ..MethodSummary::default() };
    for i in 0..cfg.params.len() {
        let taint = propagate(cfg, &def_use, seed_defs(cfg, &Seed::Param(i))?, policy);
        if taint.stmts.iter().any(|s| returns.contains(s)) {
            summary.param_to_return.insert(i);
        }
        for (site, args) in &taint.call_args {
            for arg in args {
                summary.param_to_call_arg.insert((i, *site, *arg));
            }
        }
    }
    Ok(summary)
}
