//! Tree-walking interpreter over the syntax tree, bypassing lowering.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use pcw_core::lang::ast::{BinOp, Block, Expr, ExprKind, Method, StmtKind, UnOp};
use pcw_core::lang::{Project, QualifiedName};
use pcw_core::symexec::Value;

use crate::regex_oracle::Backtracker;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InterpError {
    DivisionByZero,
    FuelExhausted,
    Stuck(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub returned: Option<Value>,
    /// Callees in call order, across all frames.
    pub calls: Vec<QualifiedName>,
}

/// Every method in the project by qualified name.
pub fn methods_of(project: &Project) -> BTreeMap<QualifiedName, &Method> {
    let mut out = BTreeMap::new();
    for file in &project.forest().files {
        for ns in &file.ast.namespaces {
            for class in &ns.classes {
                for m in &class.methods {
                    out.insert(QualifiedName::new(&ns.name, &class.name, &m.name), m);
                }
            }
        }
    }
    out
}

enum Flow {
    Normal,
    Return(Option<Value>),
}

struct Interp<'a> {
    methods: BTreeMap<QualifiedName, &'a Method>,
    patterns: BTreeMap<String, Backtracker>,
    fuel: u64,
    calls: Vec<QualifiedName>,
}

type Env = BTreeMap<String, Value>;

impl Interp<'_> {
    fn tick(&mut self) -> Result<(), InterpError> {
        if self.fuel == 0 {
            return Err(InterpError::FuelExhausted);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn invoke(&mut self, name: &QualifiedName, args: Vec<Value>) -> Result<Option<Value>, InterpError> {
        let method = *self.methods.get(name).ok_or_else(|| InterpError::Stuck(format!("no method {name}")))?;
        if method.params.len() != args.len() {
            return Err(InterpError::Stuck(format!("arity mismatch calling {name}")));
        }
        let mut env: Env = method.params.iter().map(|p| p.name.clone()).zip(args).collect();
        match self.block(&method.body, &mut env)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(None),
        }
    }

    fn block(&mut self, block: &Block, env: &mut Env) -> Result<Flow, InterpError> {
        for stmt in &block.stmts {
            self.tick()?;
            match &stmt.kind {
                StmtKind::Let { name, value } | StmtKind::Assign { name, value } => {
                    let v = self.eval(value, env)?;
                    env.insert(name.clone(), v);
                }
                StmtKind::If { cond, then_block, else_block } => {
                    let flow = if self.truth(cond, env)? {
                        self.block(then_block, env)?
                    } else if let Some(e) = else_block {
                        self.block(e, env)?
                    } else {
                        Flow::Normal
                    };
                    if let Flow::Return(v) = flow {
                        return Ok(Flow::Return(v));
                    }
                }
                StmtKind::While { cond, body } => {
                    while self.truth(cond, env)? {
                        self.tick()?;
                        if let Flow::Return(v) = self.block(body, env)? {
                            return Ok(Flow::Return(v));
                        }
                    }
                }
                StmtKind::Return(e) => {
                    let v = e.as_ref().map(|e| self.eval(e, env)).transpose()?;
                    return Ok(Flow::Return(v));
                }
                StmtKind::Call(call) => {
                    let args = call.args.iter().map(|a| self.eval(a, env)).collect::<Result<Vec<_>, _>>()?;
                    self.calls.push(call.callee.clone());
                    self.invoke(&call.callee, args)?;
                }
            }
        }
        Ok(Flow::Normal)
    }

    fn truth(&mut self, e: &Expr, env: &Env) -> Result<bool, InterpError> {
        match self.eval(e, env)? {
            Value::Bool(b) => Ok(b),
            other => Err(InterpError::Stuck(format!("condition evaluated to {other:?}"))),
        }
    }

    fn int(&mut self, e: &Expr, env: &Env) -> Result<BigInt, InterpError> {
        match self.eval(e, env)? {
            Value::Int(v) => Ok(v),
            other => Err(InterpError::Stuck(format!("expected int, got {other:?}"))),
        }
    }

    fn string(&mut self, e: &Expr, env: &Env) -> Result<String, InterpError> {
        match self.eval(e, env)? {
            Value::Str(s) => Ok(s),
            other => Err(InterpError::Stuck(format!("expected string, got {other:?}"))),
        }
    }

    fn eval(&mut self, e: &Expr, env: &Env) -> Result<Value, InterpError> {
        Ok(match &e.kind {
            ExprKind::Int(v) => Value::Int(v.clone()),
            ExprKind::Str(s) => Value::Str(s.clone()),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Var(name) => {
                env.get(name).cloned().ok_or_else(|| InterpError::Stuck(format!("unbound variable {name}")))?
            }
            ExprKind::Unary(UnOp::Not, inner) => Value::Bool(!self.truth(inner, env)?),
            ExprKind::Unary(UnOp::Neg, inner) => Value::Int(-self.int(inner, env)?),
            ExprKind::Binary(BinOp::And, l, r) => Value::Bool(self.truth(l, env)? && self.truth(r, env)?),
            ExprKind::Binary(BinOp::Or, l, r) => Value::Bool(self.truth(l, env)? || self.truth(r, env)?),
            ExprKind::Binary(op @ (BinOp::Eq | BinOp::Ne), l, r) => {
                let equal = self.eval(l, env)? == self.eval(r, env)?;
                Value::Bool(equal == (*op == BinOp::Eq))
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.int(l, env)?;
                let b = self.int(r, env)?;
                match op {
                    BinOp::Add => Value::Int(a + b),
                    BinOp::Sub => Value::Int(a - b),
                    BinOp::Mul => Value::Int(a * b),
                    BinOp::Div | BinOp::Rem if b == BigInt::from(0) => return Err(InterpError::DivisionByZero),
                    // BigInt division truncates toward zero.
                    BinOp::Div => Value::Int(a / b),
                    BinOp::Rem => Value::Int(a % b),
                    BinOp::Lt => Value::Bool(a < b),
                    BinOp::Le => Value::Bool(a <= b),
                    BinOp::Gt => Value::Bool(a > b),
                    BinOp::Ge => Value::Bool(a >= b),
                    BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or => unreachable!("handled above"),
                }
            }
            ExprKind::Call(call) => {
                let args = call.args.iter().map(|a| self.eval(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.calls.push(call.callee.clone());
                self.invoke(&call.callee, args)?
                    .ok_or_else(|| InterpError::Stuck(format!("{} returned no value", call.callee)))?
            }
            ExprKind::Len(inner) => Value::Int(BigInt::from(self.string(inner, env)?.chars().count())),
            ExprKind::Matches(inner, pattern) => {
                let s = self.string(inner, env)?;
                if !self.patterns.contains_key(pattern) {
                    let compiled = Backtracker::new(pattern).map_err(|e| InterpError::Stuck(e.to_string()))?;
                    self.patterns.insert(pattern.clone(), compiled);
                }
                Value::Bool(self.patterns[pattern].is_match(&s))
            }
        })
    }
}

/// Runs `method` on `args` with at most `fuel` statement and loop steps.
pub fn interpret(project: &Project, method: &QualifiedName, args: &[Value], fuel: u64) -> Result<Outcome, InterpError> {
    let mut interp = Interp { methods: methods_of(project), patterns: BTreeMap::new(), fuel, calls: Vec::new() };
    let returned = interp.invoke(method, args.to_vec())?;
    Ok(Outcome { returned, calls: interp.calls })
}
