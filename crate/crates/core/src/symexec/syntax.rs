//! Constraint expressions for reachability queries.
//!
//! ```text
//! name !~ "[0-9a-z]([0-9a-z-]{0,62}[0-9a-z])?"
//! len(name) <= 64
//! x > 5 && x != 7
//! ret == true
//! ```
//!
//! `~` and `!~` take a regex in string-literal form with full-match
//! semantics. String literals use the same escapes as MiniLang source.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::lang::ast::{BinOp, UnOp};
use crate::lang::cfg::Pattern;
use crate::lang::Type;

use super::constraint::SymExpr;
use super::SymexecError;

/// Symbol name of a method's return value in constraints.
pub const RETURN_SYMBOL: &str = "ret";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Str(String),
    LParen,
    RParen,
    Op(&'static str),
    Eof,
}

fn err(input: &str, position: usize, message: impl Into<String>) -> SymexecError {
    SymexecError::ConstraintSyntax { input: input.to_string(), position, message: message.into() }
}

fn tokenize(input: &str) -> Result<Vec<(Tok, usize)>, SymexecError> {
    const OPS: [&str; 17] = ["!~", "==", "!=", "<=", ">=", "&&", "||", "<", ">", "~", "!", "+", "-", "*", "/", "%", ","];
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c == '(' || c == ')' {
            out.push((if c == '(' { Tok::LParen } else { Tok::RParen }, start));
            i += 1;
            continue;
        }
        if c == '"' {
            let mut value = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(err(input, start, "unterminated string literal")),
                    Some('"') => break,
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some('"') => value.push('"'),
                            Some('\\') => value.push('\\'),
                            Some('n') => value.push('\n'),
                            Some('t') => value.push('\t'),
                            Some('r') => value.push('\r'),
                            Some(other) => {
                                value.push('\\');
                                value.push(*other);
                            }
                            None => return Err(err(input, start, "unterminated string literal")),
                        }
                        i += 2;
                    }
                    Some(c) => {
                        value.push(*c);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push((Tok::Str(value), start));
            continue;
        }
        if c.is_ascii_digit() {
            while chars.get(i).is_some_and(char::is_ascii_digit) {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push((Tok::Int(digits.parse().expect("digits")), start));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while chars.get(i).is_some_and(|c| c.is_alphanumeric() || *c == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
            continue;
        }
        for op in OPS {
            let n = op.chars().count();
            if chars[i..].iter().take(n).copied().eq(op.chars()) {
                out.push((Tok::Op(op), start));
                i += n;
                continue 'outer;
            }
        }
        return Err(err(input, start, format!("unexpected character `{c}`")));
    }
    out.push((Tok::Eof, chars.len()));
    Ok(out)
}

struct Parser<'a> {
    input: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    symbols: &'a BTreeMap<String, Type>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if matches!(self.peek(), Tok::Op(o) if *o == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SymexecError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(err(self.input, self.at(), format!("expected {what}")))
        }
    }

    fn typed(&self, at: usize, e: &SymExpr, ty: Type, what: &str) -> Result<(), SymexecError> {
        if e.ty() == ty {
            Ok(())
        } else {
            Err(err(self.input, at, format!("{what} needs {ty}, found {}", e.ty())))
        }
    }

    fn or(&mut self) -> Result<SymExpr, SymexecError> {
        let mut l = self.and()?;
        loop {
            let at = self.at();
            if !self.eat_op("||") {
                return Ok(l);
            }
            let r = self.and()?;
            self.typed(at, &l, Type::Bool, "`||`")?;
            self.typed(at, &r, Type::Bool, "`||`")?;
            l = SymExpr::binary(BinOp::Or, l, r);
        }
    }

    fn and(&mut self) -> Result<SymExpr, SymexecError> {
        let mut l = self.comparison()?;
        loop {
            let at = self.at();
            if !self.eat_op("&&") {
                return Ok(l);
            }
            let r = self.comparison()?;
            self.typed(at, &l, Type::Bool, "`&&`")?;
            self.typed(at, &r, Type::Bool, "`&&`")?;
            l = SymExpr::binary(BinOp::And, l, r);
        }
    }

    fn comparison(&mut self) -> Result<SymExpr, SymexecError> {
        let l = self.additive()?;
        let at = self.at();
        let op = match self.peek() {
            Tok::Op(o @ ("==" | "!=" | "<" | "<=" | ">" | ">=" | "~" | "!~")) => *o,
            _ => return Ok(l),
        };
        self.bump();
        if op == "~" || op == "!~" {
            self.typed(at, &l, Type::String, "regex match")?;
            let pat_at = self.at();
            let Tok::Str(source) = self.bump() else {
                return Err(err(self.input, pat_at, "expected a regex string literal"));
            };
            let ast = crate::regex::parse(&source).map_err(|e| err(self.input, pat_at, e.to_string()))?;
            let m = SymExpr::matches(l, Pattern { source, ast: Arc::new(ast) });
            return Ok(if op == "~" { m } else { SymExpr::unary(UnOp::Not, m) });
        }
        let r = self.additive()?;
        let bin = match op {
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            _ => BinOp::Ge,
        };
        if matches!(bin, BinOp::Eq | BinOp::Ne) {
            if l.ty() != r.ty() {
                return Err(err(self.input, at, format!("cannot compare {} with {}", l.ty(), r.ty())));
            }
        } else {
            self.typed(at, &l, Type::Int, "ordering")?;
            self.typed(at, &r, Type::Int, "ordering")?;
        }
        Ok(SymExpr::binary(bin, l, r))
    }

    fn additive(&mut self) -> Result<SymExpr, SymexecError> {
        let mut l = self.multiplicative()?;
        loop {
            let at = self.at();
            let op = if self.eat_op("+") {
                BinOp::Add
            } else if self.eat_op("-") {
                BinOp::Sub
            } else {
                return Ok(l);
            };
            let r = self.multiplicative()?;
            self.typed(at, &l, Type::Int, "arithmetic")?;
            self.typed(at, &r, Type::Int, "arithmetic")?;
            l = SymExpr::binary(op, l, r);
        }
    }

    fn multiplicative(&mut self) -> Result<SymExpr, SymexecError> {
        let mut l = self.unary()?;
        loop {
            let at = self.at();
            let op = if self.eat_op("*") {
                BinOp::Mul
            } else if self.eat_op("/") {
                BinOp::Div
            } else if self.eat_op("%") {
                BinOp::Rem
            } else {
                return Ok(l);
            };
            let r = self.unary()?;
            self.typed(at, &l, Type::Int, "arithmetic")?;
            self.typed(at, &r, Type::Int, "arithmetic")?;
            l = SymExpr::binary(op, l, r);
        }
    }

    fn unary(&mut self) -> Result<SymExpr, SymexecError> {
        let at = self.at();
        if self.eat_op("!") {
            let e = self.unary()?;
            self.typed(at, &e, Type::Bool, "`!`")?;
            return Ok(SymExpr::unary(UnOp::Not, e));
        }
        if self.eat_op("-") {
            let e = self.unary()?;
            self.typed(at, &e, Type::Int, "negation")?;
            return Ok(SymExpr::unary(UnOp::Neg, e));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<SymExpr, SymexecError> {
        let at = self.at();
        match self.bump() {
            Tok::Int(v) => Ok(SymExpr::Int(v)),
            Tok::Str(s) => Ok(SymExpr::Str(s)),
            Tok::LParen => {
                let e = self.or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "true" => Ok(SymExpr::Bool(true)),
                "false" => Ok(SymExpr::Bool(false)),
                "len" if *self.peek() == Tok::LParen => {
                    self.bump();
                    let arg_at = self.at();
                    let e = self.or()?;
                    self.expect(Tok::RParen, "`)`")?;
                    self.typed(arg_at, &e, Type::String, "`len`")?;
                    Ok(SymExpr::len(e))
                }
                _ => match self.symbols.get(&name) {
                    Some(ty) => Ok(SymExpr::Sym(name, *ty)),
                    None => Err(err(self.input, at, format!("unknown symbol `{name}`"))),
                },
            },
            Tok::Eof => Err(err(self.input, at, "unexpected end of constraint")),
            other => Err(err(self.input, at, format!("unexpected {other:?}"))),
        }
    }
}

/// Parses a boolean constraint over the given typed symbols.
pub fn parse_constraint(input: &str, symbols: &BTreeMap<String, Type>) -> Result<SymExpr, SymexecError> {
    let toks = tokenize(input)?;
    let mut p = Parser { input, toks, pos: 0, symbols };
    let e = p.or()?;
    if *p.peek() != Tok::Eof {
        return Err(err(input, p.at(), "unexpected trailing input"));
    }
    if e.ty() != Type::Bool {
        return Err(err(input, 0, format!("constraint must be bool, found {}", e.ty())));
    }
    Ok(e)
}

/// Splits top-level conjunctions.
pub fn conjuncts(e: SymExpr) -> Vec<SymExpr> {
    match e {
        SymExpr::Binary(BinOp::And, l, r) => {
            let mut out = conjuncts(*l);
            out.extend(conjuncts(*r));
            out
        }
        e => vec![e],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms() -> BTreeMap<String, Type> {
        [("name".to_string(), Type::String), ("x".to_string(), Type::Int), ("ret".to_string(), Type::Bool)].into()
    }

    #[test]
    fn parses_documented_forms() {
        for src in [r#"name !~ "[0-9a-z]{1,3}""#, r#"name ~ "a|b""#, "len(name) <= 64", "x > 5", "ret == true", r#"name == "a\"b""#] {
            parse_constraint(src, &syms()).unwrap_or_else(|e| panic!("{src}: {e}"));
        }
    }

    #[test]
    fn reports_positions() {
        let e = parse_constraint("x > y", &syms()).unwrap_err();
        assert!(matches!(e, SymexecError::ConstraintSyntax { position: 4, .. }), "{e}");
        assert!(parse_constraint("x + 1", &syms()).is_err());
        assert!(parse_constraint(r#"x ~ "a""#, &syms()).is_err());
    }

    #[test]
    fn splits_conjunctions() {
        let e = parse_constraint("x > 1 && x < 9 && len(name) == 2", &syms()).unwrap();
        assert_eq!(conjuncts(e).len(), 3);
    }
}
