//! Concrete values, symbolic expressions and solver constraints.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::lang::ast::{BinOp, UnOp};
use crate::lang::cfg::Pattern;
use crate::lang::Type;
use crate::regex::{is_match, RegexAst};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    Str(String),
}

impl Value {
    pub fn ty(&self) -> Type {
        match self {
            Value::Int(_) => Type::Int,
            Value::Bool(_) => Type::Bool,
            Value::Str(_) => Type::String,
        }
    }

    pub fn default_of(ty: Type) -> Value {
        match ty {
            Type::Int => Value::Int(BigInt::zero()),
            Type::Bool => Value::Bool(false),
            Type::String => Value::Str(String::new()),
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

/// Ints serialize as JSON numbers when they fit in an `i64`, otherwise as
/// decimal strings.
impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => match v.to_i64() {
                Some(i) => serializer.serialize_i64(i),
                None => serializer.serialize_str(&v.to_string()),
            },
            Value::Bool(b) => serializer.serialize_bool(*b),
            Value::Str(s) => serializer.serialize_str(s),
        }
    }
}

/// Assignment of concrete values to symbols.
pub type Model = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SymExpr {
    Int(BigInt),
    Bool(bool),
    Str(String),
    Sym(String, Type),
    Unary(UnOp, Box<SymExpr>),
    Binary(BinOp, Box<SymExpr>, Box<SymExpr>),
    Len(Box<SymExpr>),
    Matches(Box<SymExpr>, Pattern),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    DivisionByZero,
    Unbound(String),
    IllTyped,
}

fn trunc_div(a: &BigInt, b: &BigInt) -> BigInt {
    // BigInt division truncates toward zero.
    a / b
}

fn trunc_rem(a: &BigInt, b: &BigInt) -> BigInt {
    a % b
}

/// Shared semantics of binary operators on concrete values.
pub fn apply_binary(op: BinOp, l: &Value, r: &Value) -> Result<Value, EvalError> {
    use Value::*;
    Ok(match (op, l, r) {
        (BinOp::Add, Int(a), Int(b)) => Int(a + b),
        (BinOp::Sub, Int(a), Int(b)) => Int(a - b),
        (BinOp::Mul, Int(a), Int(b)) => Int(a * b),
        (BinOp::Div | BinOp::Rem, Int(_), Int(b)) if b.is_zero() => return Err(EvalError::DivisionByZero),
        (BinOp::Div, Int(a), Int(b)) => Int(trunc_div(a, b)),
        (BinOp::Rem, Int(a), Int(b)) => Int(trunc_rem(a, b)),
        (BinOp::Lt, Int(a), Int(b)) => Bool(a < b),
        (BinOp::Le, Int(a), Int(b)) => Bool(a <= b),
        (BinOp::Gt, Int(a), Int(b)) => Bool(a > b),
        (BinOp::Ge, Int(a), Int(b)) => Bool(a >= b),
        (BinOp::Eq, a, b) if a.ty() == b.ty() => Bool(a == b),
        (BinOp::Ne, a, b) if a.ty() == b.ty() => Bool(a != b),
        (BinOp::And, Bool(a), Bool(b)) => Bool(*a && *b),
        (BinOp::Or, Bool(a), Bool(b)) => Bool(*a || *b),
        _ => return Err(EvalError::IllTyped),
    })
}

pub fn apply_unary(op: UnOp, v: &Value) -> Result<Value, EvalError> {
    match (op, v) {
        (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
        (UnOp::Neg, Value::Int(i)) => Ok(Value::Int(-i)),
        _ => Err(EvalError::IllTyped),
    }
}

pub fn str_len(s: &str) -> BigInt {
    BigInt::from(s.chars().count())
}

impl SymExpr {
    pub fn ty(&self) -> Type {
        match self {
            SymExpr::Int(_) | SymExpr::Len(_) => Type::Int,
            SymExpr::Bool(_) | SymExpr::Matches(..) => Type::Bool,
            SymExpr::Str(_) => Type::String,
            SymExpr::Sym(_, ty) => *ty,
            SymExpr::Unary(UnOp::Not, _) => Type::Bool,
            SymExpr::Unary(UnOp::Neg, _) => Type::Int,
            SymExpr::Binary(op, ..) => {
                if op.is_comparison() || matches!(op, BinOp::And | BinOp::Or) {
                    Type::Bool
                } else {
                    Type::Int
                }
            }
        }
    }

    pub fn from_value(v: &Value) -> SymExpr {
        match v {
            Value::Int(i) => SymExpr::Int(i.clone()),
            Value::Bool(b) => SymExpr::Bool(*b),
            Value::Str(s) => SymExpr::Str(s.clone()),
        }
    }

    pub fn as_value(&self) -> Option<Value> {
        match self {
            SymExpr::Int(i) => Some(Value::Int(i.clone())),
            SymExpr::Bool(b) => Some(Value::Bool(*b)),
            SymExpr::Str(s) => Some(Value::Str(s.clone())),
            _ => None,
        }
    }

    /// Builds a unary node, folding constants.
    pub fn unary(op: UnOp, e: SymExpr) -> SymExpr {
        match (&op, &e) {
            (UnOp::Not, SymExpr::Unary(UnOp::Not, inner)) => return (**inner).clone(),
            (UnOp::Neg, SymExpr::Unary(UnOp::Neg, inner)) => return (**inner).clone(),
            _ => {}
        }
        match e.as_value().and_then(|v| apply_unary(op, &v).ok()) {
            Some(v) => SymExpr::from_value(&v),
            None => SymExpr::Unary(op, Box::new(e)),
        }
    }

    /// Builds a binary node, folding constants. Division by a constant zero
    /// is left unfolded so the caller can report it.
    pub fn binary(op: BinOp, l: SymExpr, r: SymExpr) -> SymExpr {
        if let (Some(a), Some(b)) = (l.as_value(), r.as_value()) {
            if let Ok(v) = apply_binary(op, &a, &b) {
                return SymExpr::from_value(&v);
            }
        }
        // `b == true` and friends reduce to `b` or `!b`.
        if matches!(op, BinOp::Eq | BinOp::Ne) {
            let (other, constant) = match (&l, &r) {
                (x, SymExpr::Bool(c)) | (SymExpr::Bool(c), x) => (Some(x.clone()), *c),
                _ => (None, false),
            };
            if let Some(other) = other {
                let positive = constant == (op == BinOp::Eq);
                return if positive { other } else { SymExpr::unary(UnOp::Not, other) };
            }
        }
        SymExpr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn len(e: SymExpr) -> SymExpr {
        match e {
            SymExpr::Str(s) => SymExpr::Int(str_len(&s)),
            e => SymExpr::Len(Box::new(e)),
        }
    }

    pub fn matches(e: SymExpr, pattern: Pattern) -> SymExpr {
        match e {
            SymExpr::Str(s) => SymExpr::Bool(is_match(&pattern.ast, &s)),
            e => SymExpr::Matches(Box::new(e), pattern),
        }
    }

    pub fn eval(&self, model: &Model) -> Result<Value, EvalError> {
        Ok(match self {
            SymExpr::Int(i) => Value::Int(i.clone()),
            SymExpr::Bool(b) => Value::Bool(*b),
            SymExpr::Str(s) => Value::Str(s.clone()),
            SymExpr::Sym(name, ty) => {
                let v = model.get(name).ok_or_else(|| EvalError::Unbound(name.clone()))?;
                if v.ty() != *ty {
                    return Err(EvalError::IllTyped);
                }
                v.clone()
            }
            SymExpr::Unary(op, e) => apply_unary(*op, &e.eval(model)?)?,
            SymExpr::Binary(op, l, r) => apply_binary(*op, &l.eval(model)?, &r.eval(model)?)?,
            SymExpr::Len(e) => match e.eval(model)? {
                Value::Str(s) => Value::Int(str_len(&s)),
                _ => return Err(EvalError::IllTyped),
            },
            SymExpr::Matches(e, p) => match e.eval(model)? {
                Value::Str(s) => Value::Bool(is_match(&p.ast, &s)),
                _ => return Err(EvalError::IllTyped),
            },
        })
    }

    /// Replaces the symbol `name` by `with`.
    pub fn substitute(&self, name: &str, with: &SymExpr) -> SymExpr {
        match self {
            SymExpr::Sym(n, _) if n == name => with.clone(),
            SymExpr::Int(_) | SymExpr::Bool(_) | SymExpr::Str(_) | SymExpr::Sym(..) => self.clone(),
            SymExpr::Unary(op, e) => SymExpr::unary(*op, e.substitute(name, with)),
            SymExpr::Binary(op, l, r) => SymExpr::binary(*op, l.substitute(name, with), r.substitute(name, with)),
            SymExpr::Len(e) => SymExpr::len(e.substitute(name, with)),
            SymExpr::Matches(e, p) => SymExpr::matches(e.substitute(name, with), p.clone()),
        }
    }

    pub fn symbols(&self, out: &mut BTreeMap<String, Type>) {
        match self {
            SymExpr::Int(_) | SymExpr::Bool(_) | SymExpr::Str(_) => {}
            SymExpr::Sym(n, ty) => {
                out.insert(n.clone(), *ty);
            }
            SymExpr::Unary(_, e) | SymExpr::Len(e) | SymExpr::Matches(e, _) => e.symbols(out),
            SymExpr::Binary(_, l, r) => {
                l.symbols(out);
                r.symbols(out);
            }
        }
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymExpr::Int(v) => write!(f, "{v}"),
            SymExpr::Bool(b) => write!(f, "{b}"),
            SymExpr::Str(s) => write!(f, "{s:?}"),
            SymExpr::Sym(n, _) => f.write_str(n),
            SymExpr::Unary(UnOp::Not, e) => write!(f, "!{e}"),
            SymExpr::Unary(UnOp::Neg, e) => write!(f, "-{e}"),
            SymExpr::Binary(op, l, r) => write!(f, "({l} {op} {r})"),
            SymExpr::Len(e) => write!(f, "len({e})"),
            SymExpr::Matches(e, p) => write!(f, "matches({e}, {:?})", p.source),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn from_binop(op: BinOp) -> Option<CmpOp> {
        Some(match op {
            BinOp::Lt => CmpOp::Lt,
            BinOp::Le => CmpOp::Le,
            BinOp::Gt => CmpOp::Gt,
            BinOp::Ge => CmpOp::Ge,
            BinOp::Eq => CmpOp::Eq,
            BinOp::Ne => CmpOp::Ne,
            _ => return None,
        })
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    /// The operator with its operands swapped.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn holds<T: Ord>(self, a: &T, b: &T) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Integer term over int symbols, string lengths and literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IntExpr {
    Const(BigInt),
    Var(String),
    Len(String),
    Neg(Box<IntExpr>),
    Add(Box<IntExpr>, Box<IntExpr>),
    Sub(Box<IntExpr>, Box<IntExpr>),
    Mul(Box<IntExpr>, Box<IntExpr>),
    Div(Box<IntExpr>, Box<IntExpr>),
    Rem(Box<IntExpr>, Box<IntExpr>),
}

impl IntExpr {
    pub fn eval(&self, model: &Model) -> Result<BigInt, EvalError> {
        let bin = |l: &IntExpr, r: &IntExpr, op: BinOp| -> Result<BigInt, EvalError> {
            let v = apply_binary(op, &Value::Int(l.eval(model)?), &Value::Int(r.eval(model)?))?;
            Ok(v.as_int().expect("int op").clone())
        };
        Ok(match self {
            IntExpr::Const(c) => c.clone(),
            IntExpr::Var(n) => match model.get(n) {
                Some(Value::Int(v)) => v.clone(),
                Some(_) => return Err(EvalError::IllTyped),
                None => return Err(EvalError::Unbound(n.clone())),
            },
            IntExpr::Len(n) => match model.get(n) {
                Some(Value::Str(s)) => str_len(s),
                Some(_) => return Err(EvalError::IllTyped),
                None => return Err(EvalError::Unbound(n.clone())),
            },
            IntExpr::Neg(e) => -e.eval(model)?,
            IntExpr::Add(l, r) => bin(l, r, BinOp::Add)?,
            IntExpr::Sub(l, r) => bin(l, r, BinOp::Sub)?,
            IntExpr::Mul(l, r) => bin(l, r, BinOp::Mul)?,
            IntExpr::Div(l, r) => bin(l, r, BinOp::Div)?,
            IntExpr::Rem(l, r) => bin(l, r, BinOp::Rem)?,
        })
    }

    pub fn is_const(&self) -> bool {
        match self {
            IntExpr::Const(_) => true,
            IntExpr::Var(_) | IntExpr::Len(_) => false,
            IntExpr::Neg(e) => e.is_const(),
            IntExpr::Add(l, r) | IntExpr::Sub(l, r) | IntExpr::Mul(l, r) | IntExpr::Div(l, r) | IntExpr::Rem(l, r) => {
                l.is_const() && r.is_const()
            }
        }
    }

    /// Int symbols and string symbols whose length is taken.
    pub fn symbols(&self, ints: &mut Vec<String>, lens: &mut Vec<String>) {
        match self {
            IntExpr::Const(_) => {}
            IntExpr::Var(n) => ints.push(n.clone()),
            IntExpr::Len(n) => lens.push(n.clone()),
            IntExpr::Neg(e) => e.symbols(ints, lens),
            IntExpr::Add(l, r) | IntExpr::Sub(l, r) | IntExpr::Mul(l, r) | IntExpr::Div(l, r) | IntExpr::Rem(l, r) => {
                l.symbols(ints, lens);
                r.symbols(ints, lens);
            }
        }
    }

    /// Linear form `sum(coeff * atom) + constant`, or `None` when a product
    /// or quotient involves a non-constant operand.
    pub fn linear(&self) -> Option<Linear> {
        Some(match self {
            IntExpr::Const(c) => Linear { terms: BTreeMap::new(), constant: c.clone() },
            IntExpr::Var(n) => Linear::atom(Atom::Var(n.clone())),
            IntExpr::Len(n) => Linear::atom(Atom::Len(n.clone())),
            IntExpr::Neg(e) => e.linear()?.scale(&BigInt::from(-1)),
            IntExpr::Add(l, r) => l.linear()?.add(&r.linear()?),
            IntExpr::Sub(l, r) => l.linear()?.add(&r.linear()?.scale(&BigInt::from(-1))),
            IntExpr::Mul(l, r) => {
                let (l, r) = (l.linear()?, r.linear()?);
                if l.terms.is_empty() {
                    r.scale(&l.constant)
                } else if r.terms.is_empty() {
                    l.scale(&r.constant)
                } else {
                    return None;
                }
            }
            IntExpr::Div(..) | IntExpr::Rem(..) => {
                if self.is_const() {
                    Linear { terms: BTreeMap::new(), constant: self.eval(&Model::new()).ok()? }
                } else {
                    return None;
                }
            }
        })
    }
}

impl fmt::Display for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntExpr::Const(c) => write!(f, "{c}"),
            IntExpr::Var(n) => f.write_str(n),
            IntExpr::Len(n) => write!(f, "len({n})"),
            IntExpr::Neg(e) => write!(f, "-{e}"),
            IntExpr::Add(l, r) => write!(f, "({l} + {r})"),
            IntExpr::Sub(l, r) => write!(f, "({l} - {r})"),
            IntExpr::Mul(l, r) => write!(f, "({l} * {r})"),
            IntExpr::Div(l, r) => write!(f, "({l} / {r})"),
            IntExpr::Rem(l, r) => write!(f, "({l} % {r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(String),
    Len(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Linear {
    pub terms: BTreeMap<Atom, BigInt>,
    pub constant: BigInt,
}

impl Linear {
    fn atom(a: Atom) -> Linear {
        Linear { terms: [(a, BigInt::from(1))].into(), constant: BigInt::zero() }
    }

    fn scale(mut self, k: &BigInt) -> Linear {
        for v in self.terms.values_mut() {
            *v *= k;
        }
        self.constant *= k;
        self.terms.retain(|_, v| !v.is_zero());
        self
    }

    fn add(mut self, other: &Linear) -> Linear {
        for (a, c) in &other.terms {
            *self.terms.entry(a.clone()).or_insert_with(BigInt::zero) += c;
        }
        self.constant += &other.constant;
        self.terms.retain(|_, v| !v.is_zero());
        self
    }

    pub fn abs_max_coeff(&self) -> BigInt {
        self.terms.values().map(|v| v.abs()).max().unwrap_or_else(BigInt::zero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint {
    IntCmp { op: CmpOp, lhs: IntExpr, rhs: IntExpr },
    BoolAtom { symbol: String, expected: bool },
    StrLen { op: CmpOp, symbol: String, bound: i64 },
    StrEq { symbol: String, literal: String, positive: bool },
    StrMatches { symbol: String, pattern: Pattern, positive: bool },
    /// A condition outside the fragments above; only ever decided by the
    /// external backend.
    Opaque { expr: SymExpr, expected: bool },
}

impl Constraint {
    pub fn str_matches(symbol: &str, pattern: &str, positive: bool) -> Result<Constraint, crate::regex::RegexError> {
        let ast = crate::regex::parse(pattern)?;
        Ok(Constraint::StrMatches {
            symbol: symbol.into(),
            pattern: Pattern { source: pattern.into(), ast: Arc::new(ast) },
            positive,
        })
    }

    pub fn int_cmp(op: CmpOp, lhs: IntExpr, rhs: IntExpr) -> Constraint {
        Constraint::IntCmp { op, lhs, rhs }
    }

    pub fn negate(&self) -> Constraint {
        match self.clone() {
            Constraint::IntCmp { op, lhs, rhs } => Constraint::IntCmp { op: op.negate(), lhs, rhs },
            Constraint::BoolAtom { symbol, expected } => Constraint::BoolAtom { symbol, expected: !expected },
            Constraint::StrLen { op, symbol, bound } => Constraint::StrLen { op: op.negate(), symbol, bound },
            Constraint::StrEq { symbol, literal, positive } => Constraint::StrEq { symbol, literal, positive: !positive },
            Constraint::StrMatches { symbol, pattern, positive } => {
                Constraint::StrMatches { symbol, pattern, positive: !positive }
            }
            Constraint::Opaque { expr, expected } => Constraint::Opaque { expr, expected: !expected },
        }
    }

    /// Symbols with their sorts.
    pub fn symbols(&self) -> BTreeMap<String, Type> {
        let mut out = BTreeMap::new();
        match self {
            Constraint::IntCmp { lhs, rhs, .. } => {
                let (mut ints, mut lens) = (Vec::new(), Vec::new());
                lhs.symbols(&mut ints, &mut lens);
                rhs.symbols(&mut ints, &mut lens);
                out.extend(ints.into_iter().map(|n| (n, Type::Int)));
                out.extend(lens.into_iter().map(|n| (n, Type::String)));
            }
            Constraint::BoolAtom { symbol, .. } => {
                out.insert(symbol.clone(), Type::Bool);
            }
            Constraint::StrLen { symbol, .. } | Constraint::StrEq { symbol, .. } | Constraint::StrMatches { symbol, .. } => {
                out.insert(symbol.clone(), Type::String);
            }
            Constraint::Opaque { expr, .. } => expr.symbols(&mut out),
        }
        out
    }

    /// Truth value under `model`.
    pub fn eval(&self, model: &Model) -> Result<bool, EvalError> {
        let string = |s: &str| match model.get(s) {
            Some(Value::Str(v)) => Ok(v.clone()),
            Some(_) => Err(EvalError::IllTyped),
            None => Err(EvalError::Unbound(s.to_string())),
        };
        Ok(match self {
            Constraint::IntCmp { op, lhs, rhs } => op.holds(&lhs.eval(model)?, &rhs.eval(model)?),
            Constraint::BoolAtom { symbol, expected } => match model.get(symbol) {
                Some(Value::Bool(b)) => b == expected,
                Some(_) => return Err(EvalError::IllTyped),
                None => return Err(EvalError::Unbound(symbol.clone())),
            },
            Constraint::StrLen { op, symbol, bound } => op.holds(&str_len(&string(symbol)?), &BigInt::from(*bound)),
            Constraint::StrEq { symbol, literal, positive } => (&string(symbol)? == literal) == *positive,
            Constraint::StrMatches { symbol, pattern, positive } => {
                is_match(&pattern.ast, &string(symbol)?) == *positive
            }
            Constraint::Opaque { expr, expected } => match expr.eval(model)? {
                Value::Bool(b) => b == *expected,
                _ => return Err(EvalError::IllTyped),
            },
        })
    }

    pub fn pattern_ast(&self) -> Option<&RegexAst> {
        match self {
            Constraint::StrMatches { pattern, .. } => Some(&pattern.ast),
            _ => None,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::IntCmp { op, lhs, rhs } => write!(f, "{lhs} {op} {rhs}"),
            Constraint::BoolAtom { symbol, expected: true } => f.write_str(symbol),
            Constraint::BoolAtom { symbol, expected: false } => write!(f, "!{symbol}"),
            Constraint::StrLen { op, symbol, bound } => write!(f, "len({symbol}) {op} {bound}"),
            Constraint::StrEq { symbol, literal, positive } => {
                write!(f, "{symbol} {} {literal:?}", if *positive { "==" } else { "!=" })
            }
            Constraint::StrMatches { symbol, pattern, positive } => {
                write!(f, "{symbol} {} {:?}", if *positive { "~" } else { "!~" }, pattern.source)
            }
            Constraint::Opaque { expr, expected: true } => write!(f, "{expr}"),
            Constraint::Opaque { expr, expected: false } => write!(f, "!{expr}"),
        }
    }
}

impl Serialize for Constraint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Converts a boolean symbolic expression to a constraint that holds iff
/// the expression evaluates to `expected`.
pub fn to_constraint(expr: &SymExpr, expected: bool) -> Constraint {
    match expr {
        SymExpr::Sym(name, Type::Bool) => Constraint::BoolAtom { symbol: name.clone(), expected },
        SymExpr::Unary(UnOp::Not, inner) => to_constraint(inner, !expected),
        SymExpr::Matches(inner, pattern) => match &**inner {
            SymExpr::Sym(name, _) => {
                Constraint::StrMatches { symbol: name.clone(), pattern: pattern.clone(), positive: expected }
            }
            _ => Constraint::Opaque { expr: expr.clone(), expected },
        },
        SymExpr::Binary(op, l, r) if l.ty() == Type::String && matches!(op, BinOp::Eq | BinOp::Ne) => {
            let positive = expected == (*op == BinOp::Eq);
            match (&**l, &**r) {
                (SymExpr::Sym(name, _), SymExpr::Str(lit)) | (SymExpr::Str(lit), SymExpr::Sym(name, _)) => {
                    Constraint::StrEq { symbol: name.clone(), literal: lit.clone(), positive }
                }
                _ => Constraint::Opaque { expr: expr.clone(), expected },
            }
        }
        SymExpr::Binary(op, l, r) if l.ty() == Type::Int => {
            let (Some(cmp), Some(lhs), Some(rhs)) = (CmpOp::from_binop(*op), int_expr(l), int_expr(r)) else {
                return Constraint::Opaque { expr: expr.clone(), expected };
            };
            let op = if expected { cmp } else { cmp.negate() };
            Constraint::IntCmp { op, lhs, rhs }
        }
        _ => Constraint::Opaque { expr: expr.clone(), expected },
    }
}

pub fn int_expr(expr: &SymExpr) -> Option<IntExpr> {
    let b = |e: &SymExpr| int_expr(e).map(Box::new);
    Some(match expr {
        SymExpr::Int(v) => IntExpr::Const(v.clone()),
        SymExpr::Sym(name, Type::Int) => IntExpr::Var(name.clone()),
        SymExpr::Len(inner) => match &**inner {
            SymExpr::Sym(name, _) => IntExpr::Len(name.clone()),
            _ => return None,
        },
        SymExpr::Unary(UnOp::Neg, e) => IntExpr::Neg(b(e)?),
        SymExpr::Binary(BinOp::Add, l, r) => IntExpr::Add(b(l)?, b(r)?),
        SymExpr::Binary(BinOp::Sub, l, r) => IntExpr::Sub(b(l)?, b(r)?),
        SymExpr::Binary(BinOp::Mul, l, r) => IntExpr::Mul(b(l)?, b(r)?),
        SymExpr::Binary(BinOp::Div, l, r) => IntExpr::Div(b(l)?, b(r)?),
        SymExpr::Binary(BinOp::Rem, l, r) => IntExpr::Rem(b(l)?, b(r)?),
        _ => return None,
    })
}
