//! AST to CFG lowering with type checking.
//!
//! Calls are hoisted into `Call` statements so expressions stay pure, `&&`
//! and `||` become branches, and non-atomic branch conditions and return
//! values are evaluated into temporaries first.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use super::ast::{self, BinOp, ExprKind, Method, QualifiedName, Span, Type, UnOp};
use super::cfg::{
    BasicBlock, BlockId, ControlFlowGraph, Expr, Pattern, Statement, StmtId, StmtKind, Terminator, TerminatorKind, Var,
};
use super::facts::{method_at, ProjectIndex};
use super::forest::SyntaxForest;
use super::FrontendError;
use crate::slice::ElementId;

/// Lowers one method. The caller is responsible for caching.
pub fn lower_method(
    forest: &SyntaxForest,
    index: &ProjectIndex,
    id: &ElementId,
) -> Result<ControlFlowGraph, FrontendError> {
    if !index.contains(id) {
        return Err(FrontendError::UnknownElement(id.clone()));
    }
    let mref = index.method_ref(id).ok_or_else(|| FrontendError::NotAMethod(id.clone()))?;
    let method = method_at(forest, mref);
    let name = index.qualified_name(id).expect("indexed method").clone();
    let mut lowerer = Lowerer::new(forest, index, method);
    lowerer.method_body()?;
    Ok(lowerer.finish(id.clone(), name))
}

struct PendingBlock {
    stmts: Vec<Statement>,
    terminator: Option<Terminator>,
}

struct Lowerer<'a> {
    forest: &'a SyntaxForest,
    index: &'a ProjectIndex,
    method: &'a Method,
    blocks: Vec<PendingBlock>,
    current: usize,
    next_stmt: u32,
    next_temp: u32,
    scopes: Vec<HashMap<String, Type>>,
    declared: HashSet<String>,
    var_types: BTreeMap<Var, Type>,
}

type LResult<T> = Result<T, FrontendError>;

impl<'a> Lowerer<'a> {
    fn new(forest: &'a SyntaxForest, index: &'a ProjectIndex, method: &'a Method) -> Self {
        let mut scope = HashMap::new();
        let mut declared = HashSet::new();
        let mut var_types = BTreeMap::new();
        for p in &method.params {
            scope.insert(p.name.clone(), p.ty);
            declared.insert(p.name.clone());
            var_types.insert(Var::Local(p.name.clone()), p.ty);
        }
        Lowerer {
            forest,
            index,
            method,
            blocks: vec![PendingBlock { stmts: Vec::new(), terminator: None }],
            current: 0,
            next_stmt: 0,
            next_temp: 0,
            scopes: vec![scope],
            declared,
            var_types,
        }
    }

    fn type_error(&self, span: Span, message: impl Into<String>) -> FrontendError {
        FrontendError::TypeError { span: self.forest.resolve(span), message: message.into() }
    }

    fn new_block(&mut self) -> usize {
        self.blocks.push(PendingBlock { stmts: Vec::new(), terminator: None });
        self.blocks.len() - 1
    }

    fn stmt_id(&mut self) -> StmtId {
        let id = StmtId(self.next_stmt);
        self.next_stmt += 1;
        id
    }

    fn temp(&mut self, ty: Type) -> Var {
        let var = Var::Temp(self.next_temp);
        self.next_temp += 1;
        self.var_types.insert(var.clone(), ty);
        var
    }

    fn emit(&mut self, kind: StmtKind, span: Option<Span>) {
        let id = self.stmt_id();
        self.blocks[self.current].stmts.push(Statement { id, kind, span });
    }

    /// Terminates the current block. Code after a terminator goes to a fresh
    /// block with no predecessors, which is pruned at the end.
    fn terminate(&mut self, kind: TerminatorKind, span: Option<Span>) {
        let id = self.stmt_id();
        self.blocks[self.current].terminator = Some(Terminator { id, kind, span });
        self.current = self.new_block();
    }

    fn terminate_to(&mut self, kind: TerminatorKind, span: Option<Span>, next: usize) {
        let id = self.stmt_id();
        self.blocks[self.current].terminator = Some(Terminator { id, kind, span });
        self.current = next;
    }

    fn lookup(&self, name: &str) -> Option<Type> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn method_body(&mut self) -> LResult<()> {
        if self.method.ret.is_some() && !block_returns(&self.method.body) {
            let end = self.method.body.span;
            let span = Span { file: end.file, start: end.end, end: end.end };
            return Err(self.type_error(span, format!("method `{}` may finish without returning a value", self.method.name)));
        }
        self.block(&self.method.body)?;
        if self.blocks[self.current].terminator.is_none() {
            self.terminate(TerminatorKind::Return(None), None);
        }
        Ok(())
    }

    fn block(&mut self, block: &ast::Block) -> LResult<()> {
        self.scopes.push(HashMap::new());
        for stmt in &block.stmts {
            self.stmt(stmt)?;
        }
        self.scopes.pop();
        Ok(())
    }

    fn stmt(&mut self, stmt: &ast::Stmt) -> LResult<()> {
        let span = Some(stmt.span);
        match &stmt.kind {
            ast::StmtKind::Let { name, value } => {
                if self.declared.contains(name) {
                    return Err(self.type_error(stmt.span, format!("`{name}` is already declared in this method")));
                }
                let target = Var::Local(name.clone());
                let ty = self.assign_into(target.clone(), value, span)?;
                self.declared.insert(name.clone());
                self.scopes.last_mut().expect("scope").insert(name.clone(), ty);
                self.var_types.insert(target, ty);
            }
            ast::StmtKind::Assign { name, value } => {
                let Some(expected) = self.lookup(name) else {
                    return Err(self.type_error(stmt.span, format!("assignment to undeclared variable `{name}`")));
                };
                let ty = self.assign_into(Var::Local(name.clone()), value, span)?;
                if ty != expected {
                    return Err(self.type_error(value.span, format!("cannot assign {ty} to `{name}` of type {expected}")));
                }
            }
            ast::StmtKind::If { cond, then_block, else_block } => {
                let then_b = self.new_block();
                let join = self.new_block();
                let else_b = if else_block.is_some() { self.new_block() } else { join };
                self.cond(cond, then_b, else_b, span)?;
                self.current = then_b;
                self.block(then_block)?;
                self.terminate_to(TerminatorKind::Jump(BlockId(join)), None, join);
                if let Some(else_block) = else_block {
                    self.current = else_b;
                    self.block(else_block)?;
                    self.terminate_to(TerminatorKind::Jump(BlockId(join)), None, join);
                }
                self.current = join;
            }
            ast::StmtKind::While { cond, body } => {
                let header = self.new_block();
                self.terminate_to(TerminatorKind::Jump(BlockId(header)), None, header);
                let body_b = self.new_block();
                let exit = self.new_block();
                if matches!(cond.kind, ExprKind::Bool(true)) {
                    self.terminate_to(TerminatorKind::Jump(BlockId(body_b)), span, body_b);
                } else {
                    self.cond(cond, body_b, exit, span)?;
                }
                self.current = body_b;
                self.block(body)?;
                self.terminate_to(TerminatorKind::Jump(BlockId(header)), None, exit);
            }
            ast::StmtKind::Return(value) => {
                let value = match (value, self.method.ret) {
                    (None, None) => None,
                    (Some(v), Some(ret)) => {
                        let (e, ty) = self.expr(v)?;
                        if ty != ret {
                            return Err(self.type_error(v.span, format!("returning {ty} from a method returning {ret}")));
                        }
                        Some(self.atomic(e, ty, span))
                    }
                    (Some(v), None) => return Err(self.type_error(v.span, "method has no return type")),
                    (None, Some(ret)) => return Err(self.type_error(stmt.span, format!("missing {ret} return value"))),
                };
                self.terminate(TerminatorKind::Return(value), span);
            }
            ast::StmtKind::Call(call) => {
                self.call(call, None, false)?;
            }
        }
        Ok(())
    }

    /// Lowers `target = value`, writing a call result straight into the
    /// target instead of going through a temporary.
    fn assign_into(&mut self, target: Var, value: &ast::Expr, span: Option<Span>) -> LResult<Type> {
        if let ExprKind::Call(call) = &value.kind {
            return Ok(self.call(call, Some(target), true)?.expect("value call has a type"));
        }
        let (e, ty) = self.expr(value)?;
        self.emit(StmtKind::Assign { target, value: e }, span);
        Ok(ty)
    }

    fn atomic(&mut self, e: Expr, ty: Type, span: Option<Span>) -> Expr {
        if e.is_atomic() {
            return e;
        }
        let t = self.temp(ty);
        self.emit(StmtKind::Assign { target: t.clone(), value: e }, span);
        Expr::Var(t)
    }

    /// Branches to `then_b` or `else_b` on `cond`, ending the current block.
    fn cond(&mut self, cond: &ast::Expr, then_b: usize, else_b: usize, span: Option<Span>) -> LResult<()> {
        match &cond.kind {
            ExprKind::Unary(UnOp::Not, inner) => self.cond(inner, else_b, then_b, span),
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), lhs, rhs) => {
                let mid = self.new_block();
                if *op == BinOp::And {
                    self.cond(lhs, mid, else_b, span)?;
                } else {
                    self.cond(lhs, then_b, mid, span)?;
                }
                self.current = mid;
                self.cond(rhs, then_b, else_b, span)
            }
            _ => {
                let (e, ty) = self.expr(cond)?;
                if ty != Type::Bool {
                    return Err(self.type_error(cond.span, format!("condition must be bool, found {ty}")));
                }
                let e = self.atomic(e, Type::Bool, Some(cond.span));
                let kind = TerminatorKind::Branch { cond: e, then_block: BlockId(then_b), else_block: BlockId(else_b) };
                let id = self.stmt_id();
                self.blocks[self.current].terminator = Some(Terminator { id, kind, span });
                self.current = self.new_block();
                Ok(())
            }
        }
    }

    fn call(&mut self, call: &ast::Call, target: Option<Var>, need_value: bool) -> LResult<Option<Type>> {
        let Some(callee_id) = self.index.method_id(&call.callee) else {
            return Err(FrontendError::UnresolvedCall {
                name: call.callee.to_string(),
                span: Some(self.forest.resolve(call.span)),
            });
        };
        let callee = method_at(self.forest, self.index.method_ref(callee_id).expect("indexed method"));
        if callee.params.len() != call.args.len() {
            return Err(self.type_error(
                call.span,
                format!("`{}` expects {} argument(s), found {}", call.callee, callee.params.len(), call.args.len()),
            ));
        }
        let mut args = Vec::with_capacity(call.args.len());
        for (arg, param) in call.args.iter().zip(&callee.params) {
            let (e, ty) = self.expr(arg)?;
            if ty != param.ty {
                return Err(self.type_error(arg.span, format!("argument `{}` expects {}, found {ty}", param.name, param.ty)));
            }
            args.push(e);
        }
        if need_value && callee.ret.is_none() {
            return Err(self.type_error(call.span, format!("`{}` does not return a value", call.callee)));
        }
        let callee_name: QualifiedName = call.callee.clone();
        self.emit(StmtKind::Call { target, callee: callee_name, args }, Some(call.span));
        Ok(callee.ret)
    }

    fn expr(&mut self, expr: &ast::Expr) -> LResult<(Expr, Type)> {
        Ok(match &expr.kind {
            ExprKind::Int(v) => (Expr::Int(v.clone()), Type::Int),
            ExprKind::Str(s) => (Expr::Str(s.clone()), Type::String),
            ExprKind::Bool(b) => (Expr::Bool(*b), Type::Bool),
            ExprKind::Var(name) => {
                let ty = self
                    .lookup(name)
                    .ok_or_else(|| self.type_error(expr.span, format!("undeclared variable `{name}`")))?;
                (Expr::Var(Var::Local(name.clone())), ty)
            }
            ExprKind::Unary(op, inner) => {
                let (e, ty) = self.expr(inner)?;
                let expected = match op {
                    UnOp::Not => Type::Bool,
                    UnOp::Neg => Type::Int,
                };
                if ty != expected {
                    return Err(self.type_error(expr.span, format!("operand must be {expected}, found {ty}")));
                }
                (Expr::Unary(*op, Box::new(e)), ty)
            }
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), lhs, rhs) => self.short_circuit(*op, lhs, rhs)?,
            ExprKind::Binary(op, lhs, rhs) => {
                let (l, lt) = self.expr(lhs)?;
                let (r, rt) = self.expr(rhs)?;
                let result = match op {
                    BinOp::Eq | BinOp::Ne if lt == rt => Type::Bool,
                    BinOp::Eq | BinOp::Ne => {
                        return Err(self.type_error(expr.span, format!("cannot compare {lt} with {rt}")));
                    }
                    _ if lt != Type::Int || rt != Type::Int => {
                        return Err(self.type_error(expr.span, format!("`{op}` expects int operands, found {lt} and {rt}")));
                    }
                    _ if op.is_comparison() => Type::Bool,
                    _ => Type::Int,
                };
                (Expr::Binary(*op, Box::new(l), Box::new(r)), result)
            }
            ExprKind::Call(call) => {
                let ty = self.peek_return_type(call)?;
                let var = self.temp(ty);
                self.call(call, Some(var.clone()), true)?;
                (Expr::Var(var), ty)
            }
            ExprKind::Len(inner) => {
                let (e, ty) = self.expr(inner)?;
                if ty != Type::String {
                    return Err(self.type_error(expr.span, format!("len expects string, found {ty}")));
                }
                (Expr::Len(Box::new(e)), Type::Int)
            }
            ExprKind::Matches(inner, pattern) => {
                let (e, ty) = self.expr(inner)?;
                if ty != Type::String {
                    return Err(self.type_error(expr.span, format!("matches expects string, found {ty}")));
                }
                let ast = crate::regex::parse(pattern)
                    .map_err(|err| self.type_error(expr.span, format!("invalid pattern: {err}")))?;
                (Expr::Matches(Box::new(e), Pattern { source: pattern.clone(), ast: Arc::new(ast) }), Type::Bool)
            }
        })
    }

    fn peek_return_type(&self, call: &ast::Call) -> LResult<Type> {
        let Some(callee_id) = self.index.method_id(&call.callee) else {
            return Err(FrontendError::UnresolvedCall {
                name: call.callee.to_string(),
                span: Some(self.forest.resolve(call.span)),
            });
        };
        let callee = method_at(self.forest, self.index.method_ref(callee_id).expect("indexed method"));
        callee
            .ret
            .ok_or_else(|| self.type_error(call.span, format!("`{}` does not return a value", call.callee)))
    }

    /// `a && b` in value position: `t = a; if t { t = b }`, and dually for `||`.
    fn short_circuit(&mut self, op: BinOp, lhs: &ast::Expr, rhs: &ast::Expr) -> LResult<(Expr, Type)> {
        let (l, lt) = self.expr(lhs)?;
        if lt != Type::Bool {
            return Err(self.type_error(lhs.span, format!("`{op}` expects bool operands, found {lt}")));
        }
        let t = self.temp(Type::Bool);
        self.emit(StmtKind::Assign { target: t.clone(), value: l }, Some(lhs.span));
        let rhs_b = self.new_block();
        let join = self.new_block();
        let (then_b, else_b) = if op == BinOp::And { (rhs_b, join) } else { (join, rhs_b) };
        let kind = TerminatorKind::Branch {
            cond: Expr::Var(t.clone()),
            then_block: BlockId(then_b),
            else_block: BlockId(else_b),
        };
        self.terminate_to(kind, Some(lhs.span.to(rhs.span)), rhs_b);
        let (r, rt) = self.expr(rhs)?;
        if rt != Type::Bool {
            return Err(self.type_error(rhs.span, format!("`{op}` expects bool operands, found {rt}")));
        }
        self.emit(StmtKind::Assign { target: t.clone(), value: r }, Some(rhs.span));
        self.terminate_to(TerminatorKind::Jump(BlockId(join)), None, join);
        Ok((Expr::Var(t), Type::Bool))
    }

    /// Drops blocks unreachable from the entry and renumbers the rest in
    /// creation order.
    fn finish(self, method: ElementId, name: QualifiedName) -> ControlFlowGraph {
        let Lowerer { blocks, method: ast_method, var_types, .. } = self;
        let succs = |b: &PendingBlock| -> Vec<usize> {
            match b.terminator.as_ref().map(|t| &t.kind) {
                Some(TerminatorKind::Jump(t)) => vec![t.0],
                Some(TerminatorKind::Branch { then_block, else_block, .. }) => vec![then_block.0, else_block.0],
                _ => vec![],
            }
        };
        let mut reachable = vec![false; blocks.len()];
        let mut stack = vec![0usize];
        reachable[0] = true;
        while let Some(b) = stack.pop() {
            for s in succs(&blocks[b]) {
                if !reachable[s] {
                    reachable[s] = true;
                    stack.push(s);
                }
            }
        }
        let mut renumber = vec![usize::MAX; blocks.len()];
        let mut next = 0;
        for (old, r) in reachable.iter().enumerate() {
            if *r {
                renumber[old] = next;
                next += 1;
            }
        }
        let remap = |b: BlockId| BlockId(renumber[b.0]);
        let mut out = Vec::with_capacity(next);
        for (old, block) in blocks.into_iter().enumerate() {
            if !reachable[old] {
                continue;
            }
            let mut terminator = block.terminator.expect("reachable blocks are terminated");
            terminator.kind = match terminator.kind {
                TerminatorKind::Jump(t) => TerminatorKind::Jump(remap(t)),
                TerminatorKind::Branch { cond, then_block, else_block } => {
                    TerminatorKind::Branch { cond, then_block: remap(then_block), else_block: remap(else_block) }
                }
                ret @ TerminatorKind::Return(_) => ret,
            };
            out.push(BasicBlock { id: BlockId(renumber[old]), stmts: block.stmts, terminator });
        }
        ControlFlowGraph {
            method,
            name,
            params: ast_method.params.iter().map(|p| (p.name.clone(), p.ty)).collect(),
            ret: ast_method.ret,
            blocks: out,
            entry: BlockId(0),
            var_types,
        }
    }
}

/// Whether every path through `block` ends in a `return` (or never leaves a
/// `while (true)` loop).
fn block_returns(block: &ast::Block) -> bool {
    block.stmts.iter().any(|stmt| match &stmt.kind {
        ast::StmtKind::Return(_) => true,
        ast::StmtKind::If { then_block, else_block: Some(else_block), .. } => {
            block_returns(then_block) && block_returns(else_block)
        }
        ast::StmtKind::While { cond, .. } => matches!(cond.kind, ExprKind::Bool(true)),
        _ => false,
    })
}
