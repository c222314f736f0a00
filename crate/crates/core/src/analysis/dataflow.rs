//! Monotone data-flow framework with a worklist solver.

use std::collections::{BTreeSet, VecDeque};

use crate::lang::{BasicBlock, BlockId, ControlFlowGraph};

use super::AnalysisError;

/// Default cap on block visits before a solve is abandoned.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

pub trait DataflowProblem {
    type Value: Clone + PartialEq;

    fn direction(&self) -> Direction;

    /// Identity of `join`.
    fn bottom(&self, cfg: &ControlFlowGraph) -> Self::Value;

    /// Value flowing into the entry block (forward) or out of returning
    /// blocks (backward).
    fn boundary(&self, cfg: &ControlFlowGraph) -> Self::Value;

    fn join(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;

    /// Maps the value before the block (in flow order) to the value after it.
    fn transfer(&self, cfg: &ControlFlowGraph, block: &BasicBlock, input: &Self::Value) -> Self::Value;
}

/// Per-block values in program order: `ins[b]` holds at the start of `b` and
/// `outs[b]` at its end, whatever the direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DataflowResult<V> {
    pub ins: Vec<V>,
    pub outs: Vec<V>,
    /// Block visits performed by the solver.
    pub visits: usize,
}

impl<V> DataflowResult<V> {
    pub fn entry_of(&self, block: BlockId) -> &V {
        &self.ins[block.0]
    }

    pub fn exit_of(&self, block: BlockId) -> &V {
        &self.outs[block.0]
    }
}

/// Order in which pending blocks are taken from the worklist. The fixpoint
/// does not depend on it; only the visit count does.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum WorklistOrder {
    /// Reverse postorder for forward problems, postorder for backward ones.
    #[default]
    Structural,
    Fifo,
    /// Lowest position in the given permutation first.
    Priority(Vec<BlockId>),
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub order: WorklistOrder,
    pub budget: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { order: WorklistOrder::Structural, budget: DEFAULT_BUDGET }
    }
}

pub fn solve<P: DataflowProblem>(
    cfg: &ControlFlowGraph,
    problem: &P,
) -> Result<DataflowResult<P::Value>, AnalysisError> {
    solve_with(cfg, problem, &SolverOptions::default())
}

enum Worklist {
    Queue(VecDeque<usize>, Vec<bool>),
    Ranked(BTreeSet<(usize, usize)>, Vec<usize>),
}

impl Worklist {
    fn push(&mut self, b: usize) {
        match self {
            Worklist::Queue(queue, queued) => {
                if !queued[b] {
                    queued[b] = true;
                    queue.push_back(b);
                }
            }
            Worklist::Ranked(set, rank) => {
                set.insert((rank[b], b));
            }
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            Worklist::Queue(queue, queued) => {
                let b = queue.pop_front()?;
                queued[b] = false;
                Some(b)
            }
            Worklist::Ranked(set, _) => set.pop_first().map(|(_, b)| b),
        }
    }
}

pub fn solve_with<P: DataflowProblem>(
    cfg: &ControlFlowGraph,
    problem: &P,
    options: &SolverOptions,
) -> Result<DataflowResult<P::Value>, AnalysisError> {
    let n = cfg.blocks.len();
    let forward = problem.direction() == Direction::Forward;
    let preds = cfg.predecessors();
    let succs: Vec<Vec<BlockId>> = cfg.blocks.iter().map(|b| b.terminator.successors()).collect();
    // Flow-order sources and sinks of every block.
    let (sources, sinks) = if forward { (&preds, &succs) } else { (&succs, &preds) };

    let bottom = problem.bottom(cfg);
    let boundary = problem.boundary(cfg);
    let mut before = vec![bottom.clone(); n];
    let mut after = vec![bottom.clone(); n];

    let mut order: Vec<usize> = match &options.order {
        WorklistOrder::Priority(perm) => perm.iter().map(|b| b.0).collect(),
        _ => {
            let mut rpo: Vec<usize> = cfg.reverse_postorder().into_iter().map(|b| b.0).collect();
            if !forward {
                rpo.reverse();
            }
            rpo
        }
    };
    // Blocks missing from a caller-supplied permutation go last.
    let mut seen = vec![false; n];
    order.retain(|&b| b < n && !std::mem::replace(&mut seen[b], true));
    order.extend((0..n).filter(|&b| !seen[b]));

    let mut worklist = match options.order {
        WorklistOrder::Fifo => Worklist::Queue(VecDeque::with_capacity(n), vec![false; n]),
        _ => {
            let mut rank = vec![0; n];
            for (pos, &b) in order.iter().enumerate() {
                rank[b] = pos;
            }
            Worklist::Ranked(BTreeSet::new(), rank)
        }
    };
    for &b in &order {
        worklist.push(b);
    }

    let mut visits = 0usize;
    while let Some(b) = worklist.pop() {
        visits += 1;
        if visits > options.budget {
            return Err(AnalysisError::BudgetExceeded { visits: options.budget });
        }
        let is_boundary = if forward { b == cfg.entry.0 } else { succs[b].is_empty() };
        let mut input = if is_boundary { boundary.clone() } else { bottom.clone() };
        for src in &sources[b] {
            input = problem.join(&input, &after[src.0]);
        }
        let output = problem.transfer(cfg, &cfg.blocks[b], &input);
        before[b] = input;
        if output != after[b] {
            after[b] = output;
            for sink in &sinks[b] {
                worklist.push(sink.0);
            }
        }
    }

    let (ins, outs) = if forward { (before, after) } else { (after, before) };
    Ok(DataflowResult { ins, outs, visits })
}
