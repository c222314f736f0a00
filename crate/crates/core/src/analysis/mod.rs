//! Data-flow framework and the analyses built on it.

pub mod callgraph;
pub mod dataflow;
pub mod dependency;
pub mod reaching;

use thiserror::Error;

use crate::lang::FrontendError;
use crate::slice::ElementId;

pub use callgraph::{interprocedural_dependency, CallEdge, CallGraph};
pub use dataflow::{solve, solve_with, DataflowProblem, DataflowResult, Direction, SolverOptions, WorklistOrder};
pub use dependency::{dependency_closure, method_summary, CallPolicy, Conservative, MethodSummary, Seed};
pub use reaching::{check_definite_assignment, reaching_definitions, DefSite, DefUse, Liveness, ReachingDefinitions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("fixpoint not reached within {visits} block visits")]
    BudgetExceeded { visits: usize },
    #[error("unknown seed {0}")]
    UnknownSeed(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(ElementId),
    #[error("parameter index {index} out of range for `{method}` with {arity} parameter(s)")]
    BadParamIndex { method: ElementId, index: usize, arity: usize },
    #[error(transparent)]
    Frontend(#[from] FrontendError),
}
