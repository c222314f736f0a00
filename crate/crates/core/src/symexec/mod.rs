//! Symbolic execution, constraint solving and reachability.

pub mod automata;
pub mod concrete;
pub mod constraint;
pub mod explore;
pub mod reach;
pub mod smtlib;
pub mod solver;
pub mod syntax;

use thiserror::Error;

use crate::lang::FrontendError;

pub use automata::{AutomataError, Dfa, ProductMode};
pub use concrete::{concrete_execute, ExecError, Trace, DEFAULT_FUEL};
pub use constraint::{to_constraint, CmpOp, Constraint, EvalError, IntExpr, Model, SymExpr, Value};
pub use explore::{explore_paths, Bounds, Exploration, ExploreOptions, ExploredPath, PathCondition, Target};
pub use reach::{analyze_reachability, query_symbols, ReachQuery, ReachReport, ReachStatus};
pub use smtlib::{emit_smtlib, parse_smtlib_result, ProcessBackend, SmtError};
pub use solver::{check_sat, SatResult, SolverConfig};
pub use syntax::{parse_constraint, RETURN_SYMBOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymexecError {
    #[error("invalid constraint `{input}` at {position}: {message}")]
    ConstraintSyntax { input: String, position: usize, message: String },
    #[error("invalid constraint: {0}")]
    BadConstraint(String),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
}
