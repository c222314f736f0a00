//! Reaching definitions, liveness and the definite-assignment check.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::lang::{BasicBlock, ControlFlowGraph, StmtId, Var};

use super::dataflow::{solve, DataflowProblem, DataflowResult, Direction};
use super::AnalysisError;

/// Where a variable's value was last written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DefSite {
    /// Pseudo-definition of the i-th parameter at method entry.
    Param(usize),
    Stmt(StmtId),
    /// Synthetic definition at entry for every non-parameter variable.
    Uninit,
}

pub type Def = (Var, DefSite);
pub type DefSet = BTreeSet<Def>;

#[derive(Debug, Clone, Copy, Default)]
pub struct ReachingDefinitions {
    /// Seed every non-parameter variable with an `Uninit` definition.
    pub with_uninit: bool,
}

impl ReachingDefinitions {
    /// Applies one block's definitions in order, calling `visit` with the
    /// set that holds just before each statement and before the terminator.
    pub fn walk(&self, block: &BasicBlock, input: &DefSet, mut visit: impl FnMut(StmtId, &DefSet)) -> DefSet {
        let mut cur = input.clone();
        for stmt in &block.stmts {
            visit(stmt.id, &cur);
            if let Some(var) = stmt.def() {
                cur.retain(|(v, _)| v != var);
                cur.insert((var.clone(), DefSite::Stmt(stmt.id)));
            }
        }
        visit(block.terminator.id, &cur);
        cur
    }
}

impl DataflowProblem for ReachingDefinitions {
    type Value = DefSet;

    fn direction(&self) -> Direction {
        Direction::Forward
    }

    fn bottom(&self, _: &ControlFlowGraph) -> DefSet {
        DefSet::new()
    }

    fn boundary(&self, cfg: &ControlFlowGraph) -> DefSet {
        let mut defs: DefSet = (0..cfg.params.len())
            .map(|i| (cfg.param_var(i).expect("param index"), DefSite::Param(i)))
            .collect();
        if self.with_uninit {
            for var in cfg.var_types.keys() {
                if cfg.param_index(var).is_none() {
                    defs.insert((var.clone(), DefSite::Uninit));
                }
            }
        }
        defs
    }

    fn join(&self, a: &DefSet, b: &DefSet) -> DefSet {
        a.union(b).cloned().collect()
    }

    fn transfer(&self, _: &ControlFlowGraph, block: &BasicBlock, input: &DefSet) -> DefSet {
        self.walk(block, input, |_, _| {})
    }
}

pub fn reaching_definitions(cfg: &ControlFlowGraph) -> Result<DataflowResult<DefSet>, AnalysisError> {
    solve(cfg, &ReachingDefinitions::default())
}

/// For every statement and terminator, the definitions reaching each
/// variable it reads.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DefUse {
    pub uses: BTreeMap<StmtId, BTreeMap<Var, BTreeSet<DefSite>>>,
}

impl DefUse {
    pub fn build(cfg: &ControlFlowGraph, problem: ReachingDefinitions) -> Result<Self, AnalysisError> {
        let result = solve(cfg, &problem)?;
        let mut uses = BTreeMap::new();
        for block in &cfg.blocks {
            let reads: BTreeMap<StmtId, BTreeSet<&Var>> = block
                .stmts
                .iter()
                .map(|s| (s.id, s.uses()))
                .chain([(block.terminator.id, block.terminator.uses())])
                .collect();
            problem.walk(block, result.entry_of(block.id), |id, defs| {
                let mut per_var: BTreeMap<Var, BTreeSet<DefSite>> = BTreeMap::new();
                for var in &reads[&id] {
                    let sites = defs.iter().filter(|(v, _)| v == *var).map(|(_, s)| *s).collect();
                    per_var.insert((*var).clone(), sites);
                }
                uses.insert(id, per_var);
            });
        }
        Ok(DefUse { uses })
    }

    pub fn reaching(&self, site: StmtId, var: &Var) -> Option<&BTreeSet<DefSite>> {
        self.uses.get(&site).and_then(|m| m.get(var))
    }
}

/// Returns the first variable that may be read before it is written.
pub fn check_definite_assignment(cfg: &ControlFlowGraph) -> Result<(), Var> {
    let def_use = DefUse::build(cfg, ReachingDefinitions { with_uninit: true }).map_err(|_| {
        // The lattice is finite and tiny; the budget cannot be hit on a
        // lowered method.
        Var::Local("<budget>".into())
    })?;
    for per_var in def_use.uses.values() {
        for (var, sites) in per_var {
            if sites.is_empty() || sites.contains(&DefSite::Uninit) {
                return Err(var.clone());
            }
        }
    }
    Ok(())
}

/// Backward liveness of variables.
#[derive(Debug, Clone, Copy, Default)]
pub struct Liveness;

impl DataflowProblem for Liveness {
    type Value = BTreeSet<Var>;

    fn direction(&self) -> Direction {
        Direction::Backward
    }

    fn bottom(&self, _: &ControlFlowGraph) -> Self::Value {
        BTreeSet::new()
    }

    fn boundary(&self, _: &ControlFlowGraph) -> Self::Value {
        BTreeSet::new()
    }

    fn join(&self, a: &Self::Value, b: &Self::Value) -> Self::Value {
        a.union(b).cloned().collect()
    }

    fn transfer(&self, _: &ControlFlowGraph, block: &BasicBlock, live_out: &Self::Value) -> Self::Value {
        let mut live = live_out.clone();
        live.extend(block.terminator.uses().into_iter().cloned());
        for stmt in block.stmts.iter().rev() {
            if let Some(def) = stmt.def() {
                live.remove(def);
            }
            live.extend(stmt.uses().into_iter().cloned());
        }
        live
    }
}
