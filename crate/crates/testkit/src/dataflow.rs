//! Round-robin fixpoint iteration, and reaching definitions and liveness
//! restated as per-statement equations.

use std::collections::BTreeSet;

use pcw_core::analysis::{DataflowProblem, DefSite, Direction};
use pcw_core::lang::{ControlFlowGraph, Var};

/// Sweeps every block in index order until nothing changes. Returns
/// `(ins, outs)` in program order, like the worklist solver.
pub fn round_robin<P: DataflowProblem>(cfg: &ControlFlowGraph, problem: &P) -> (Vec<P::Value>, Vec<P::Value>) {
    let n = cfg.blocks.len();
    let forward = problem.direction() == Direction::Forward;
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (b, block) in cfg.blocks.iter().enumerate() {
        for s in block.terminator.successors() {
            preds[s.0].push(b);
        }
    }
    let succs: Vec<Vec<usize>> =
        cfg.blocks.iter().map(|b| b.terminator.successors().iter().map(|s| s.0).collect()).collect();
    let bottom = problem.bottom(cfg);
    let boundary = problem.boundary(cfg);
    let mut before = vec![bottom.clone(); n];
    let mut after = vec![bottom.clone(); n];
    loop {
        let mut changed = false;
        for b in 0..n {
            let boundary_block = if forward { b == cfg.entry.0 } else { succs[b].is_empty() };
            let sources = if forward { &preds[b] } else { &succs[b] };
            let mut input = if boundary_block { boundary.clone() } else { bottom.clone() };
            for &s in sources {
                input = problem.join(&input, &after[s]);
            }
            let output = problem.transfer(cfg, &cfg.blocks[b], &input);
            if input != before[b] || output != after[b] {
                changed = true;
            }
            before[b] = input;
            after[b] = output;
        }
        if !changed {
            break;
        }
    }
    if forward {
        (before, after)
    } else {
        (after, before)
    }
}

pub type DefFact = (Var, DefSite);

/// Reaching definitions at the start of every block.
pub fn reaching_in(cfg: &ControlFlowGraph, with_uninit: bool) -> Vec<BTreeSet<DefFact>> {
    let n = cfg.blocks.len();
    let mut entry_facts = BTreeSet::new();
    for (i, (name, _)) in cfg.params.iter().enumerate() {
        entry_facts.insert((Var::Local(name.clone()), DefSite::Param(i)));
    }
    if with_uninit {
        for v in cfg.var_types.keys() {
            let is_param = matches!(v, Var::Local(name) if cfg.params.iter().any(|(p, _)| p == name));
            if !is_param {
                entry_facts.insert((v.clone(), DefSite::Uninit));
            }
        }
    }
    let mut ins = vec![BTreeSet::new(); n];
    let mut outs: Vec<BTreeSet<DefFact>> = vec![BTreeSet::new(); n];
    loop {
        let mut changed = false;
        for b in 0..n {
            let mut input: BTreeSet<DefFact> =
                if b == cfg.entry.0 { entry_facts.clone() } else { BTreeSet::new() };
            for (p, block) in cfg.blocks.iter().enumerate() {
                if block.terminator.successors().iter().any(|s| s.0 == b) {
                    input.extend(outs[p].iter().cloned());
                }
            }
            let mut cur = input.clone();
            for stmt in &cfg.blocks[b].stmts {
                if let Some(target) = stmt.def() {
                    cur.retain(|(v, _)| v != target);
                    cur.insert((target.clone(), DefSite::Stmt(stmt.id)));
                }
            }
            if input != ins[b] || cur != outs[b] {
                changed = true;
                ins[b] = input;
                outs[b] = cur;
            }
        }
        if !changed {
            return ins;
        }
    }
}

/// Variables live at the start of every block.
pub fn live_in(cfg: &ControlFlowGraph) -> Vec<BTreeSet<Var>> {
    let n = cfg.blocks.len();
    let mut ins: Vec<BTreeSet<Var>> = vec![BTreeSet::new(); n];
    loop {
        let mut changed = false;
        for b in (0..n).rev() {
            let block = &cfg.blocks[b];
            let mut live: BTreeSet<Var> = BTreeSet::new();
            for s in block.terminator.successors() {
                live.extend(ins[s.0].iter().cloned());
            }
            live.extend(block.terminator.uses().into_iter().cloned());
            for stmt in block.stmts.iter().rev() {
                if let Some(d) = stmt.def() {
                    live.remove(d);
                }
                live.extend(stmt.uses().into_iter().cloned());
            }
            if live != ins[b] {
                ins[b] = live;
                changed = true;
            }
        }
        if !changed {
            return ins;
        }
    }
}
