//! Language-independent intermediate representation: per-method control flow
//! graphs of basic blocks over pure expression trees.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::regex::RegexAst;
use crate::slice::ElementId;

use super::ast::{BinOp, QualifiedName, Span, Type, UnOp};

/// A method-local variable. Temporaries are introduced by lowering and have
/// no source location.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    Local(String),
    Temp(u32),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Local(name) => f.write_str(name),
            Var::Temp(n) => write!(f, "t{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub usize);

/// Identifies a statement or terminator within one method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StmtId(pub u32);

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// A regex literal as written, with its parsed tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub source: String,
    pub ast: Arc<RegexAst>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(BigInt),
    Bool(bool),
    Str(String),
    Var(Var),
    Unary(UnOp, Box<Expr>),
    /// Never `&&` or `||`; those are lowered to branches.
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Len(Box<Expr>),
    Matches(Box<Expr>, Pattern),
}

impl Expr {
    pub fn is_atomic(&self) -> bool {
        matches!(self, Expr::Int(_) | Expr::Bool(_) | Expr::Str(_) | Expr::Var(_))
    }

    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Str(_) => {}
            Expr::Var(v) => f(v),
            Expr::Unary(_, e) | Expr::Len(e) | Expr::Matches(e, _) => e.visit_vars(f),
            Expr::Binary(_, l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<&Var> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v);
        });
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Str(s) => write!(f, "{s:?}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(UnOp::Not, e) => write!(f, "!{e}"),
            Expr::Unary(UnOp::Neg, e) => write!(f, "-{e}"),
            Expr::Binary(op, l, r) => write!(f, "({l} {op} {r})"),
            Expr::Len(e) => write!(f, "len({e})"),
            Expr::Matches(e, p) => write!(f, "matches({e}, {:?})", p.source),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Assign { target: Var, value: Expr },
    Call { target: Option<Var>, callee: QualifiedName, args: Vec<Expr> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub id: StmtId,
    pub kind: StmtKind,
    pub span: Option<Span>,
}

impl Statement {
    pub fn def(&self) -> Option<&Var> {
        match &self.kind {
            StmtKind::Assign { target, .. } => Some(target),
            StmtKind::Call { target, .. } => target.as_ref(),
        }
    }

    pub fn uses(&self) -> BTreeSet<&Var> {
        match &self.kind {
            StmtKind::Assign { value, .. } => value.vars(),
            StmtKind::Call { args, .. } => args.iter().flat_map(Expr::vars).collect(),
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            StmtKind::Assign { target, value } => write!(f, "{target} = {value}"),
            StmtKind::Call { target, callee, args } => {
                if let Some(t) = target {
                    write!(f, "{t} = ")?;
                }
                let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                write!(f, "call {callee}({})", args.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerminatorKind {
    Jump(BlockId),
    Branch { cond: Expr, then_block: BlockId, else_block: BlockId },
    Return(Option<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Terminator {
    pub id: StmtId,
    pub kind: TerminatorKind,
    pub span: Option<Span>,
}

impl Terminator {
    pub fn successors(&self) -> Vec<BlockId> {
        match &self.kind {
            TerminatorKind::Jump(b) => vec![*b],
            TerminatorKind::Branch { then_block, else_block, .. } => vec![*then_block, *else_block],
            TerminatorKind::Return(_) => vec![],
        }
    }

    pub fn uses(&self) -> BTreeSet<&Var> {
        match &self.kind {
            TerminatorKind::Jump(_) | TerminatorKind::Return(None) => BTreeSet::new(),
            TerminatorKind::Branch { cond, .. } => cond.vars(),
            TerminatorKind::Return(Some(e)) => e.vars(),
        }
    }
}

impl fmt::Display for Terminator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TerminatorKind::Jump(b) => write!(f, "jump {b}"),
            TerminatorKind::Branch { cond, then_block, else_block } => {
                write!(f, "branch {cond} ? {then_block} : {else_block}")
            }
            TerminatorKind::Return(None) => f.write_str("return"),
            TerminatorKind::Return(Some(e)) => write!(f, "return {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicBlock {
    pub id: BlockId,
    pub stmts: Vec<Statement>,
    pub terminator: Terminator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlFlowGraph {
    pub method: ElementId,
    pub name: QualifiedName,
    pub params: Vec<(String, Type)>,
    pub ret: Option<Type>,
    pub blocks: Vec<BasicBlock>,
    pub entry: BlockId,
    pub var_types: BTreeMap<Var, Type>,
}

/// A program point addressed by statement id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site<'a> {
    Stmt(BlockId, usize, &'a Statement),
    Term(BlockId, &'a Terminator),
}

impl ControlFlowGraph {
    pub fn block(&self, id: BlockId) -> &BasicBlock {
        &self.blocks[id.0]
    }

    pub fn successors(&self, id: BlockId) -> Vec<BlockId> {
        self.blocks[id.0].terminator.successors()
    }

    /// Predecessor lists indexed by block, each in ascending order and
    /// repeated for parallel edges.
    pub fn predecessors(&self) -> Vec<Vec<BlockId>> {
        let mut preds = vec![Vec::new(); self.blocks.len()];
        for block in &self.blocks {
            for succ in block.terminator.successors() {
                preds[succ.0].push(block.id);
            }
        }
        preds
    }

    pub fn param_var(&self, index: usize) -> Option<Var> {
        self.params.get(index).map(|(name, _)| Var::Local(name.clone()))
    }

    pub fn param_index(&self, var: &Var) -> Option<usize> {
        match var {
            Var::Local(name) => self.params.iter().position(|(p, _)| p == name),
            Var::Temp(_) => None,
        }
    }

    pub fn site(&self, id: StmtId) -> Option<Site<'_>> {
        for block in &self.blocks {
            for (idx, stmt) in block.stmts.iter().enumerate() {
                if stmt.id == id {
                    return Some(Site::Stmt(block.id, idx, stmt));
                }
            }
            if block.terminator.id == id {
                return Some(Site::Term(block.id, &block.terminator));
            }
        }
        None
    }

    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.blocks.iter().flat_map(|b| b.stmts.iter())
    }

    pub fn call_sites(&self) -> impl Iterator<Item = (&Statement, &QualifiedName, &[Expr])> {
        self.statements().filter_map(|s| match &s.kind {
            StmtKind::Call { callee, args, .. } => Some((s, callee, args.as_slice())),
            StmtKind::Assign { .. } => None,
        })
    }

    /// Reverse postorder from the entry block.
    pub fn reverse_postorder(&self) -> Vec<BlockId> {
        let mut visited = vec![false; self.blocks.len()];
        let mut order = Vec::with_capacity(self.blocks.len());
        let mut stack = vec![(self.entry, 0usize)];
        visited[self.entry.0] = true;
        while let Some((block, next)) = stack.pop() {
            let succs = self.successors(block);
            if next < succs.len() {
                stack.push((block, next + 1));
                let succ = succs[next];
                if !visited[succ.0] {
                    visited[succ.0] = true;
                    stack.push((succ, 0));
                }
            } else {
                order.push(block);
            }
        }
        order.reverse();
        order
    }

    /// Structural invariants: valid block references, ids matching
    /// positions, unique statement ids, every block reachable from entry.
    pub fn validate(&self) -> Result<(), String> {
        if self.entry.0 >= self.blocks.len() {
            return Err("entry out of range".into());
        }
        let mut ids = BTreeSet::new();
        for (idx, block) in self.blocks.iter().enumerate() {
            if block.id.0 != idx {
                return Err(format!("block at {idx} has id {}", block.id));
            }
            for succ in block.terminator.successors() {
                if succ.0 >= self.blocks.len() {
                    return Err(format!("{} jumps to missing {succ}", block.id));
                }
            }
            for id in block.stmts.iter().map(|s| s.id).chain([block.terminator.id]) {
                if !ids.insert(id) {
                    return Err(format!("duplicate statement id {id}"));
                }
            }
        }
        let reachable = self.reverse_postorder().len();
        if reachable != self.blocks.len() {
            return Err(format!("{} of {} blocks unreachable", self.blocks.len() - reachable, self.blocks.len()));
        }
        Ok(())
    }
}

impl fmt::Display for ControlFlowGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|(n, t)| format!("{n}: {t}")).collect();
        write!(f, "fn {}({})", self.name, params.join(", "))?;
        if let Some(ret) = self.ret {
            write!(f, " -> {ret}")?;
        }
        writeln!(f, " entry {}", self.entry)?;
        for block in &self.blocks {
            writeln!(f, "{}:", block.id)?;
            for stmt in &block.stmts {
                writeln!(f, "  [{}] {stmt}", stmt.id)?;
            }
            writeln!(f, "  [{}] {}", block.terminator.id, block.terminator)?;
        }
        Ok(())
    }
}
