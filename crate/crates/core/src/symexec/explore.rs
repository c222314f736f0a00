//! Depth-first symbolic path exploration with call inlining.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lang::ast::BinOp;
use crate::lang::cfg::{Expr, StmtKind};
use crate::lang::{BlockId, ControlFlowGraph, Project, SourceSpan, StmtId, TerminatorKind, Var};
use crate::slice::ElementId;

use super::constraint::{to_constraint, Constraint, SymExpr};
use super::solver::{check_sat, SatResult, SolverConfig};
use super::SymexecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct Bounds {
    /// Extra entries allowed per block and frame.
    pub loop_unroll: usize,
    pub max_paths: usize,
    pub inline_depth: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { loop_unroll: 8, max_paths: 10_000, inline_depth: 8 }
    }
}

/// Total statement steps across one exploration.
const STEP_BUDGET: usize = 1_000_000;

/// Search budget of the feasibility checks made at branches.
const PRUNE_SEARCH_BUDGET: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Target {
    /// A statement or terminator of some method on the path.
    Stmt { method: ElementId, stmt: StmtId },
    /// Entry into a call of this method.
    CallTo { method: ElementId },
    /// Normal return of the analyzed method.
    Return,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PathCondition {
    pub constraints: Vec<Constraint>,
    pub branch_spans: Vec<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExploredPath {
    pub condition: PathCondition,
    pub reached: bool,
    /// Return value of the analyzed method, when the path ran to its end.
    #[serde(skip)]
    pub returned: Option<SymExpr>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Exploration {
    pub paths: Vec<ExploredPath>,
    /// Some path was cut by a bound.
    pub truncated: bool,
    /// Branch outcomes discarded as unsatisfiable.
    pub pruned: usize,
}

pub struct ExploreOptions<'a> {
    pub bounds: Bounds,
    pub target: Target,
    /// Assumed on every path when pruning, but not recorded in conditions.
    pub assumptions: &'a [Constraint],
    /// Keep going after the target to the method's return.
    pub continue_to_return: bool,
    pub solver: &'a SolverConfig,
}

#[derive(Clone)]
struct Frame {
    cfg: Arc<ControlFlowGraph>,
    block: BlockId,
    index: usize,
    store: BTreeMap<Var, SymExpr>,
    visits: HashMap<BlockId, usize>,
    /// Caller variable receiving the return value.
    result: Option<Var>,
}

#[derive(Clone)]
struct State {
    frames: Vec<Frame>,
    condition: PathCondition,
    reached: bool,
}

enum Step {
    Continue(State),
    Fork(Vec<State>),
    Done(ExploredPath),
    /// Infeasible or failing path, dropped silently.
    Dead,
    Truncated,
}

/// Symbolic value of a pure expression. Non-constant divisors are pushed to
/// `divisors`; `None` means a division by the constant zero.
fn eval(expr: &Expr, store: &BTreeMap<Var, SymExpr>, divisors: &mut Vec<SymExpr>) -> Option<SymExpr> {
    Some(match expr {
        Expr::Int(v) => SymExpr::Int(v.clone()),
        Expr::Bool(b) => SymExpr::Bool(*b),
        Expr::Str(s) => SymExpr::Str(s.clone()),
        Expr::Var(v) => store.get(v).cloned().expect("definitely assigned variable"),
        Expr::Unary(op, e) => SymExpr::unary(*op, eval(e, store, divisors)?),
        Expr::Binary(op, l, r) => {
            let l = eval(l, store, divisors)?;
            let r = eval(r, store, divisors)?;
            if matches!(op, BinOp::Div | BinOp::Rem) {
                match r.as_value() {
                    Some(v) if v.as_int().is_some_and(|i| i == &0.into()) => return None,
                    Some(_) => {}
                    None => divisors.push(r.clone()),
                }
            }
            SymExpr::binary(*op, l, r)
        }
        Expr::Len(e) => SymExpr::len(eval(e, store, divisors)?),
        Expr::Matches(e, p) => SymExpr::matches(eval(e, store, divisors)?, p.clone()),
    })
}

pub struct Explorer<'a> {
    project: &'a Project,
    options: ExploreOptions<'a>,
    steps: usize,
}

impl<'a> Explorer<'a> {
    pub fn new(project: &'a Project, options: ExploreOptions<'a>) -> Self {
        Explorer { project, options, steps: 0 }
    }

    pub fn run(mut self, method: &ElementId) -> Result<Exploration, SymexecError> {
        let cfg = self.project.lower(method)?;
        let store = cfg
            .params
            .iter()
            .map(|(name, ty)| (Var::Local(name.clone()), SymExpr::Sym(name.clone(), *ty)))
            .collect();
        let mut root = Frame { cfg: cfg.clone(), block: cfg.entry, index: 0, store, visits: HashMap::new(), result: None };
        root.visits.insert(cfg.entry, 1);
        let mut stack = vec![State { frames: vec![root], condition: PathCondition::default(), reached: false }];
        let mut out = Exploration::default();
        // Pruned and killed paths count against the path bound too.
        let mut dead = 0usize;
        while let Some(mut state) = stack.pop() {
            if out.paths.len() + out.pruned + dead >= self.options.bounds.max_paths {
                out.truncated = true;
                break;
            }
            loop {
                self.steps += 1;
                if self.steps > STEP_BUDGET {
                    out.truncated = true;
                    return Ok(out);
                }
                match self.step(state, &mut out)? {
                    Step::Continue(next) => state = next,
                    Step::Fork(mut next) => {
                        // Explore the first successor next.
                        next.reverse();
                        stack.extend(next);
                        break;
                    }
                    Step::Done(path) => {
                        out.paths.push(path);
                        break;
                    }
                    Step::Dead => {
                        dead += 1;
                        break;
                    }
                    Step::Truncated => {
                        out.truncated = true;
                        break;
                    }
                }
            }
        }
        Ok(out)
    }

    fn hits(&self, method: &ElementId, id: StmtId) -> bool {
        matches!(&self.options.target, Target::Stmt { method: m, stmt } if m == method && *stmt == id)
    }

    fn finish_reached(&self, state: State) -> Step {
        Step::Done(ExploredPath { condition: state.condition, reached: true, returned: None })
    }

    fn step(&mut self, mut state: State, out: &mut Exploration) -> Result<Step, SymexecError> {
        let depth = state.frames.len();
        let frame = state.frames.last_mut().expect("non-empty frame stack");
        let cfg = frame.cfg.clone();
        let block = cfg.block(frame.block);

        if let Some(stmt) = block.stmts.get(frame.index) {
            frame.index += 1;
            if !state.reached && self.hits(&cfg.method, stmt.id) {
                state.reached = true;
                if !self.options.continue_to_return {
                    return Ok(self.finish_reached(state));
                }
            }
            let frame = state.frames.last_mut().expect("frame");
            let mut divisors = Vec::new();
            match &stmt.kind {
                StmtKind::Assign { target, value } => {
                    let Some(v) = eval(value, &frame.store, &mut divisors) else { return Ok(Step::Dead) };
                    frame.store.insert(target.clone(), v);
                    self.guard_divisors(&mut state, divisors);
                    Ok(Step::Continue(state))
                }
                StmtKind::Call { target, args, .. } => {
                    let mut values = Vec::with_capacity(args.len());
                    for a in args {
                        let Some(v) = eval(a, &frame.store, &mut divisors) else { return Ok(Step::Dead) };
                        values.push(v);
                    }
                    let result = target.clone();
                    self.guard_divisors(&mut state, divisors);
                    let callee_id = self.project.resolve_call_target(stmt)?;
                    if !state.reached && matches!(&self.options.target, Target::CallTo { method } if *method == callee_id) {
                        state.reached = true;
                        if !self.options.continue_to_return {
                            return Ok(self.finish_reached(state));
                        }
                    }
                    if depth > self.options.bounds.inline_depth {
                        return Ok(Step::Truncated);
                    }
                    let callee = self.project.lower(&callee_id)?;
                    let store = callee
                        .params
                        .iter()
                        .zip(values)
                        .map(|((name, _), v)| (Var::Local(name.clone()), v))
                        .collect();
                    let mut visits = HashMap::new();
                    visits.insert(callee.entry, 1);
                    state.frames.push(Frame { cfg: callee.clone(), block: callee.entry, index: 0, store, visits, result });
                    Ok(Step::Continue(state))
                }
            }
        } else {
            let term = &block.terminator;
            if !state.reached && self.hits(&cfg.method, term.id) {
                state.reached = true;
                if !self.options.continue_to_return {
                    return Ok(self.finish_reached(state));
                }
            }
            let frame = state.frames.last_mut().expect("frame");
            let mut divisors = Vec::new();
            match &term.kind {
                TerminatorKind::Jump(next) => Ok(self.enter(state, *next)),
                TerminatorKind::Branch { cond, then_block, else_block } => {
                    let Some(c) = eval(cond, &frame.store, &mut divisors) else { return Ok(Step::Dead) };
                    self.guard_divisors(&mut state, divisors);
                    match c {
                        SymExpr::Bool(true) => Ok(self.enter(state, *then_block)),
                        SymExpr::Bool(false) => Ok(self.enter(state, *else_block)),
                        c => {
                            let span = term.span.map(|s| self.project.forest().resolve(s));
                            let mut forks = Vec::new();
                            let mut sibling_pruned = false;
                            for (expected, succ) in [(true, *then_block), (false, *else_block)] {
                                let constraint = to_constraint(&c, expected);
                                let known = &state.condition.constraints;
                                let implied = known.contains(&constraint);
                                let refuted = !implied && known.contains(&to_constraint(&c, !expected));
                                // If one side is infeasible the other one holds on every model.
                                if refuted || (!implied && !sibling_pruned && self.infeasible(&state.condition, &constraint)) {
                                    sibling_pruned = true;
                                    out.pruned += 1;
                                    continue;
                                }
                                let mut next = state.clone();
                                next.condition.constraints.push(constraint);
                                next.condition.branch_spans.extend(span.clone());
                                match self.enter(next, succ) {
                                    Step::Continue(s) => forks.push(s),
                                    Step::Truncated => out.truncated = true,
                                    _ => {}
                                }
                            }
                            Ok(Step::Fork(forks))
                        }
                    }
                }
                TerminatorKind::Return(value) => {
                    let value = match value {
                        Some(e) => match eval(e, &frame.store, &mut divisors) {
                            Some(v) => Some(v),
                            None => return Ok(Step::Dead),
                        },
                        None => None,
                    };
                    self.guard_divisors(&mut state, divisors);
                    let done = state.frames.pop().expect("frame");
                    match state.frames.last_mut() {
                        None => {
                            let reached = state.reached || self.options.target == Target::Return;
                            Ok(Step::Done(ExploredPath { condition: state.condition, reached, returned: value }))
                        }
                        Some(caller) => {
                            if let (Some(var), Some(v)) = (done.result, value) {
                                caller.store.insert(var, v);
                            }
                            Ok(Step::Continue(state))
                        }
                    }
                }
            }
        }
    }

    fn enter(&self, mut state: State, block: BlockId) -> Step {
        let frame = state.frames.last_mut().expect("frame");
        let count = frame.visits.entry(block).or_insert(0);
        *count += 1;
        if *count > self.options.bounds.loop_unroll + 1 {
            return Step::Truncated;
        }
        frame.block = block;
        frame.index = 0;
        Step::Continue(state)
    }

    fn guard_divisors(&self, state: &mut State, divisors: Vec<SymExpr>) {
        for d in divisors {
            let c = to_constraint(&SymExpr::binary(BinOp::Ne, d, SymExpr::Int(0.into())), true);
            if !state.condition.constraints.contains(&c) {
                state.condition.constraints.push(c);
            }
        }
    }

    fn infeasible(&self, condition: &PathCondition, extra: &Constraint) -> bool {
        let mut all: Vec<Constraint> = self.options.assumptions.to_vec();
        all.extend(condition.constraints.iter().cloned());
        all.push(extra.clone());
        // A cheap check: running out of search only keeps the path alive.
        let config = SolverConfig {
            backend: None,
            search_budget: self.options.solver.search_budget.min(PRUNE_SEARCH_BUDGET),
            ..self.options.solver.clone()
        };
        matches!(check_sat(&all, &config), SatResult::Unsat)
    }
}

/// Enumerates paths of `method` toward `target` under `options`.
pub fn explore_paths(
    project: &Project,
    method: &ElementId,
    options: ExploreOptions<'_>,
) -> Result<Exploration, SymexecError> {
    Explorer::new(project, options).run(method)
}
