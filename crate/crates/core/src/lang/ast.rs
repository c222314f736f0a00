use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

/// Index of a file within a [`SyntaxForest`](super::SyntaxForest).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FileId(pub u32);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    /// 1-based.
    pub line: u32,
    /// 1-based, counted in Unicode scalars.
    pub col: u32,
    /// Byte offset into the file text.
    pub offset: usize,
}

/// Half-open source range `[start, end)` within one file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub file: FileId,
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span { file: self.file, start: self.start, end: other.end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Type {
    Int,
    Bool,
    String,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Int => "int",
            Type::Bool => "bool",
            Type::String => "string",
        })
    }
}

/// `Namespace.Class.Method`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QualifiedName {
    pub namespace: String,
    pub class: String,
    pub method: String,
}

impl QualifiedName {
    pub fn new(namespace: &str, class: &str, method: &str) -> Self {
        QualifiedName { namespace: namespace.into(), class: class.into(), method: method.into() }
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut parts = text.split('.');
        let (ns, class, method) = (parts.next()?, parts.next()?, parts.next()?);
        if parts.next().is_some() || [ns, class, method].iter().any(|p| p.is_empty()) {
            return None;
        }
        Some(QualifiedName::new(ns, class, method))
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.namespace, self.class, self.method)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub namespaces: Vec<Namespace>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Namespace {
    pub name: String,
    pub classes: Vec<Class>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Class {
    pub name: String,
    pub methods: Vec<Method>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub args: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Method {
    pub attrs: Vec<Attribute>,
    pub name: String,
    pub params: Vec<Param>,
    pub ret: Option<Type>,
    pub body: Block,
    /// From the first attribute (or `fn`) to the closing brace.
    pub span: Span,
}

impl Method {
    pub fn endpoint(&self) -> Option<(&str, &str)> {
        self.attrs
            .iter()
            .find(|a| a.name == "endpoint" && a.args.len() == 2)
            .map(|a| (a.args[0].as_str(), a.args[1].as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Let { name: String, value: Expr },
    Assign { name: String, value: Expr },
    If { cond: Expr, then_block: Block, else_block: Option<Block> },
    While { cond: Expr, body: Block },
    Return(Option<Expr>),
    Call(Call),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub callee: QualifiedName,
    pub args: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(BigInt),
    Str(String),
    Bool(bool),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Call),
    Len(Box<Expr>),
    Matches(Box<Expr>, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne)
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Replaces every span with the default span so trees parsed from different
/// texts can be compared structurally.
pub trait StripSpans {
    fn strip_spans(&mut self);
}

impl StripSpans for SourceFile {
    fn strip_spans(&mut self) {
        self.span = Span::default();
        for ns in &mut self.namespaces {
            ns.span = Span::default();
            for class in &mut ns.classes {
                class.span = Span::default();
                for method in &mut class.methods {
                    method.span = Span::default();
                    method.attrs.iter_mut().for_each(|a| a.span = Span::default());
                    method.params.iter_mut().for_each(|p| p.span = Span::default());
                    method.body.strip_spans();
                }
            }
        }
    }
}

impl StripSpans for Block {
    fn strip_spans(&mut self) {
        self.span = Span::default();
        for stmt in &mut self.stmts {
            stmt.span = Span::default();
            match &mut stmt.kind {
                StmtKind::Let { value, .. } | StmtKind::Assign { value, .. } => value.strip_spans(),
                StmtKind::If { cond, then_block, else_block } => {
                    cond.strip_spans();
                    then_block.strip_spans();
                    if let Some(b) = else_block {
                        b.strip_spans();
                    }
                }
                StmtKind::While { cond, body } => {
                    cond.strip_spans();
                    body.strip_spans();
                }
                StmtKind::Return(value) => {
                    if let Some(v) = value {
                        v.strip_spans();
                    }
                }
                StmtKind::Call(call) => call.strip_spans(),
            }
        }
    }
}

impl StripSpans for Call {
    fn strip_spans(&mut self) {
        self.span = Span::default();
        self.args.iter_mut().for_each(StripSpans::strip_spans);
    }
}

impl StripSpans for Expr {
    fn strip_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            ExprKind::Int(_) | ExprKind::Str(_) | ExprKind::Bool(_) | ExprKind::Var(_) => {}
            ExprKind::Unary(_, e) | ExprKind::Len(e) | ExprKind::Matches(e, _) => e.strip_spans(),
            ExprKind::Binary(_, l, r) => {
                l.strip_spans();
                r.strip_spans();
            }
            ExprKind::Call(call) => call.strip_spans(),
        }
    }
}
