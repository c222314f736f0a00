//! Concrete big-step execution of lowered methods.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::lang::ast::BinOp;
use crate::lang::cfg::{Expr, StmtKind};
use crate::lang::{BlockId, ControlFlowGraph, FrontendError, Project, StmtId, TerminatorKind, Var};
use crate::regex::is_match;
use crate::slice::ElementId;

use super::constraint::{apply_binary, apply_unary, str_len, EvalError, Value};
use super::explore::Target;

pub const DEFAULT_FUEL: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CallRecord {
    pub caller: ElementId,
    pub site: StmtId,
    pub callee: ElementId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Trace {
    /// Statements and terminators in execution order.
    pub steps: Vec<(ElementId, StmtId)>,
    pub calls: Vec<CallRecord>,
    pub returned: Option<Value>,
    /// The analyzed method returned normally.
    pub completed: bool,
}

impl Trace {
    pub fn reaches(&self, target: &Target) -> bool {
        match target {
            Target::Stmt { method, stmt } => self.steps.iter().any(|(m, s)| m == method && s == stmt),
            Target::CallTo { method } => self.calls.iter().any(|c| &c.callee == method),
            Target::Return => self.completed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("step budget exhausted")]
    FuelExhausted(Box<Trace>),
    #[error("division by zero")]
    DivisionByZero(Box<Trace>),
    #[error("bad arguments: {0}")]
    BadArguments(String),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
}

impl ExecError {
    /// The partial trace up to the failure.
    pub fn trace(&self) -> Option<&Trace> {
        match self {
            ExecError::FuelExhausted(t) | ExecError::DivisionByZero(t) => Some(t),
            _ => None,
        }
    }
}

struct Frame {
    cfg: Arc<ControlFlowGraph>,
    block: BlockId,
    index: usize,
    store: BTreeMap<Var, Value>,
    result: Option<Var>,
}

fn eval(expr: &Expr, store: &BTreeMap<Var, Value>) -> Result<Value, EvalError> {
    Ok(match expr {
        Expr::Int(v) => Value::Int(v.clone()),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Str(s) => Value::Str(s.clone()),
        Expr::Var(v) => store.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.to_string()))?,
        Expr::Unary(op, e) => apply_unary(*op, &eval(e, store)?)?,
        Expr::Binary(op, l, r) => {
            debug_assert!(!matches!(op, BinOp::And | BinOp::Or));
            apply_binary(*op, &eval(l, store)?, &eval(r, store)?)?
        }
        Expr::Len(e) => match eval(e, store)? {
            Value::Str(s) => Value::Int(str_len(&s)),
            _ => return Err(EvalError::IllTyped),
        },
        Expr::Matches(e, p) => match eval(e, store)? {
            Value::Str(s) => Value::Bool(is_match(&p.ast, &s)),
            _ => return Err(EvalError::IllTyped),
        },
    })
}

fn check_args(cfg: &ControlFlowGraph, args: &[Value]) -> Result<(), ExecError> {
    if cfg.params.len() != args.len() {
        return Err(ExecError::BadArguments(format!("`{}` takes {} argument(s), got {}", cfg.name, cfg.params.len(), args.len())));
    }
    for ((name, ty), v) in cfg.params.iter().zip(args) {
        if v.ty() != *ty {
            return Err(ExecError::BadArguments(format!("`{name}` expects {ty}, got {}", v.ty())));
        }
    }
    Ok(())
}

/// Runs `method` on `args`, inlining calls, for at most `fuel` steps.
pub fn concrete_execute(project: &Project, method: &ElementId, args: &[Value], fuel: usize) -> Result<Trace, ExecError> {
    let cfg = project.lower(method)?;
    check_args(&cfg, args)?;
    let store = cfg.params.iter().map(|(n, _)| Var::Local(n.clone())).zip(args.iter().cloned()).collect();
    let mut frames = vec![Frame { block: cfg.entry, cfg, index: 0, store, result: None }];
    let mut trace = Trace::default();
    let fail = |e: EvalError, trace: &mut Trace| match e {
        EvalError::DivisionByZero => ExecError::DivisionByZero(Box::new(std::mem::take(trace))),
        other => ExecError::BadArguments(format!("evaluation failed: {other:?}")),
    };
    loop {
        if trace.steps.len() >= fuel {
            return Err(ExecError::FuelExhausted(Box::new(trace)));
        }
        let frame = frames.last_mut().expect("frame");
        let cfg = frame.cfg.clone();
        let block = cfg.block(frame.block);
        if let Some(stmt) = block.stmts.get(frame.index) {
            frame.index += 1;
            trace.steps.push((cfg.method.clone(), stmt.id));
            match &stmt.kind {
                StmtKind::Assign { target, value } => {
                    let v = eval(value, &frame.store).map_err(|e| fail(e, &mut trace))?;
                    frame.store.insert(target.clone(), v);
                }
                StmtKind::Call { target, args, .. } => {
                    let values = args
                        .iter()
                        .map(|a| eval(a, &frame.store))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| fail(e, &mut trace))?;
                    let callee_id = project.resolve_call_target(stmt)?;
                    trace.calls.push(CallRecord { caller: cfg.method.clone(), site: stmt.id, callee: callee_id.clone() });
                    let callee = project.lower(&callee_id)?;
                    let store = callee.params.iter().map(|(n, _)| Var::Local(n.clone())).zip(values).collect();
                    frames.push(Frame { block: callee.entry, cfg: callee, index: 0, store, result: target.clone() });
                }
            }
        } else {
            let term = &block.terminator;
            trace.steps.push((cfg.method.clone(), term.id));
            match &term.kind {
                TerminatorKind::Jump(next) => {
                    frame.block = *next;
                    frame.index = 0;
                }
                TerminatorKind::Branch { cond, then_block, else_block } => {
                    let c = eval(cond, &frame.store).map_err(|e| fail(e, &mut trace))?;
                    frame.block = if c.as_bool().expect("boolean condition") { *then_block } else { *else_block };
                    frame.index = 0;
                }
                TerminatorKind::Return(value) => {
                    let v = value.as_ref().map(|e| eval(e, &frame.store)).transpose().map_err(|e| fail(e, &mut trace))?;
                    let done = frames.pop().expect("frame");
                    match frames.last_mut() {
                        None => {
                            trace.returned = v;
                            trace.completed = true;
                            return Ok(trace);
                        }
                        Some(caller) => {
                            if let (Some(var), Some(v)) = (done.result, v) {
                                caller.store.insert(var, v);
                            }
                        }
                    }
                }
            }
        }
    }
}
