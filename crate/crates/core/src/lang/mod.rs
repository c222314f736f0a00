//! MiniLang frontend: lexer, parser, fact extraction and CFG lowering.

pub mod ast;
pub mod cfg;
mod facts;
mod forest;
pub mod lexer;
mod lower;
pub mod parser;
pub mod pretty;
mod project;

use std::path::PathBuf;

use thiserror::Error;

use crate::slice::ElementId;

pub use ast::{FileId, Pos, QualifiedName, Span, Type};
pub use cfg::{BasicBlock, BlockId, ControlFlowGraph, Site, Statement, StmtId, Terminator, TerminatorKind, Var};
pub use facts::{
    calls_in, method_at, minilang_schema, MethodRef, MiniLangFacts, ProjectIndex, CALLS, CLASS, METHOD, NAMESPACE,
    PROJECT,
};
pub use forest::{
    parse_project, parse_sources, Diagnostic, ParsedFile, Severity, SourceSpan, SyntaxForest, EXTENSION, HTTP_VERBS,
};
pub use lower::lower_method;
pub use project::{Project, SpanTarget};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("no .mini files under {}", .0.display())]
    EmptyProject(PathBuf),
    #[error("project has {} error diagnostic(s)", .0.len())]
    InvalidForest(Vec<Diagnostic>),
    #[error("unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("`{0}` is not a method")]
    NotAMethod(ElementId),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("type error at {}:{}:{}: {message}", span.file, span.start_line, span.start_col)]
    TypeError { span: SourceSpan, message: String },
    #[error("unresolved call to `{name}`")]
    UnresolvedCall { name: String, span: Option<SourceSpan> },
    #[error("ambiguous call to `{0}`")]
    AmbiguousCall(String),
    #[error("no source span for {0}")]
    NoSpan(String),
}
