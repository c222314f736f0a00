//! SMT-LIB 2 emission, result parsing and an external solver process.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use num_bigint::BigInt;
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::lang::ast::{BinOp, UnOp};
use crate::lang::Type;
use crate::regex::{RegexAst, MAX_SCALAR};

use super::constraint::{CmpOp, Constraint, IntExpr, Model, SymExpr, Value};
use super::solver::SatResult;

/// Largest code point of the SMT-LIB strings theory.
const SMT_MAX_CHAR: u32 = 0x2FFFF;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmtError {
    #[error("solver backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("malformed solver output: {0}")]
    MalformedSolverOutput(String),
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
}

pub fn quote_string(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\"\""),
            ' '..='~' if c != '\\' => out.push(c),
            _ => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
        }
    }
    out.push('"');
    out
}

fn int_lit(v: &BigInt) -> String {
    if v.sign() == num_bigint::Sign::Minus {
        format!("(- {})", -v)
    } else {
        v.to_string()
    }
}

fn tdiv(a: &str, b: &str) -> String {
    format!("(ite (>= {a} 0) (div {a} {b}) (- (div (- {a}) {b})))")
}

fn trem(a: &str, b: &str) -> String {
    format!("(- {a} (* {b} {}))", tdiv(a, b))
}

fn int_term(e: &IntExpr) -> String {
    match e {
        IntExpr::Const(v) => int_lit(v),
        IntExpr::Var(v) => symbol(v),
        IntExpr::Len(s) => format!("(str.len {})", symbol(s)),
        IntExpr::Neg(e) => format!("(- {})", int_term(e)),
        IntExpr::Add(l, r) => format!("(+ {} {})", int_term(l), int_term(r)),
        IntExpr::Sub(l, r) => format!("(- {} {})", int_term(l), int_term(r)),
        IntExpr::Mul(l, r) => format!("(* {} {})", int_term(l), int_term(r)),
        IntExpr::Div(l, r) => tdiv(&int_term(l), &int_term(r)),
        IntExpr::Rem(l, r) => trem(&int_term(l), &int_term(r)),
    }
}

fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "_.$-".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{}|", name.replace(['|', '\\'], "_"))
    }
}

fn cmp(op: CmpOp, l: String, r: String) -> String {
    match op {
        CmpOp::Ne => format!("(not (= {l} {r}))"),
        _ => format!("({} {l} {r})", if op == CmpOp::Eq { "=" } else { op.symbol() }),
    }
}

fn char_range(lo: u32, hi: u32) -> Option<String> {
    let hi = hi.min(SMT_MAX_CHAR);
    if lo > hi {
        return None;
    }
    let ch = |c: u32| format!("\"\\u{{{c:x}}}\"");
    Some(format!("(re.range {} {})", ch(lo), ch(hi)))
}

pub fn regex_term(ast: &RegexAst) -> String {
    match ast {
        RegexAst::Literal(c) => format!("(str.to_re {})", quote_string(&c.to_string())),
        RegexAst::AnyChar => "re.allchar".into(),
        RegexAst::Class(class) => {
            let parts: Vec<String> =
                class.scalar_ranges().into_iter().filter_map(|(lo, hi)| char_range(lo, hi.min(MAX_SCALAR))).collect();
            match parts.len() {
                0 => "re.none".into(),
                1 => parts[0].clone(),
                _ => format!("(re.union {})", parts.join(" ")),
            }
        }
        RegexAst::Concat(items) => match items.len() {
            0 => "(str.to_re \"\")".into(),
            1 => regex_term(&items[0]),
            _ => format!("(re.++ {})", items.iter().map(regex_term).collect::<Vec<_>>().join(" ")),
        },
        RegexAst::Alt(items) => match items.len() {
            0 => "re.none".into(),
            1 => regex_term(&items[0]),
            _ => format!("(re.union {})", items.iter().map(regex_term).collect::<Vec<_>>().join(" ")),
        },
        RegexAst::Star(n) => format!("(re.* {})", regex_term(n)),
        RegexAst::Plus(n) => format!("(re.+ {})", regex_term(n)),
        RegexAst::Opt(n) => format!("(re.opt {})", regex_term(n)),
        RegexAst::Repeat { node, min, max } => {
            let inner = regex_term(node);
            match max {
                Some(max) => format!("((_ re.loop {min} {max}) {inner})"),
                None => format!("(re.++ ((_ re.loop {min} {min}) {inner}) (re.* {inner}))"),
            }
        }
    }
}

fn sym_term(e: &SymExpr) -> String {
    match e {
        SymExpr::Int(v) => int_lit(v),
        SymExpr::Bool(b) => b.to_string(),
        SymExpr::Str(s) => quote_string(s),
        SymExpr::Sym(name, _) => symbol(name),
        SymExpr::Unary(UnOp::Neg, e) => format!("(- {})", sym_term(e)),
        SymExpr::Unary(UnOp::Not, e) => format!("(not {})", sym_term(e)),
        SymExpr::Binary(op, l, r) => {
            let (l, r) = (sym_term(l), sym_term(r));
            match op {
                BinOp::Add => format!("(+ {l} {r})"),
                BinOp::Sub => format!("(- {l} {r})"),
                BinOp::Mul => format!("(* {l} {r})"),
                BinOp::Div => tdiv(&l, &r),
                BinOp::Rem => trem(&l, &r),
                BinOp::And => format!("(and {l} {r})"),
                BinOp::Or => format!("(or {l} {r})"),
                _ => cmp(CmpOp::from_binop(*op).expect("comparison"), l, r),
            }
        }
        SymExpr::Len(e) => format!("(str.len {})", sym_term(e)),
        SymExpr::Matches(e, p) => format!("(str.in_re {} {})", sym_term(e), regex_term(&p.ast)),
    }
}

fn constraint_term(c: &Constraint) -> String {
    let signed = |positive: bool, t: String| if positive { t } else { format!("(not {t})") };
    match c {
        Constraint::IntCmp { op, lhs, rhs } => cmp(*op, int_term(lhs), int_term(rhs)),
        Constraint::BoolAtom { symbol: s, expected } => signed(*expected, symbol(s)),
        Constraint::StrLen { op, symbol: s, bound } => cmp(*op, format!("(str.len {})", symbol(s)), int_lit(&(*bound).into())),
        Constraint::StrEq { symbol: s, literal, positive } => {
            signed(*positive, format!("(= {} {})", symbol(s), quote_string(literal)))
        }
        Constraint::StrMatches { symbol: s, pattern, positive } => {
            signed(*positive, format!("(str.in_re {} {})", symbol(s), regex_term(&pattern.ast)))
        }
        Constraint::Opaque { expr, expected } => signed(*expected, sym_term(expr)),
    }
}

fn sort_name(ty: Type) -> &'static str {
    match ty {
        Type::Int => "Int",
        Type::Bool => "Bool",
        Type::String => "String",
    }
}

/// A complete script: declarations, assertions, `check-sat` and `get-model`.
pub fn emit_smtlib(constraints: &[Constraint]) -> String {
    let mut sorts = std::collections::BTreeMap::new();
    for c in constraints {
        sorts.extend(c.symbols());
    }
    let mut out = String::from("(set-logic QF_SLIA)\n");
    for (name, ty) in &sorts {
        let _ = writeln!(out, "(declare-const {} {})", symbol(name), sort_name(*ty));
    }
    // Restrict string symbols to scalar values the evaluator can represent.
    for (name, ty) in &sorts {
        if *ty == Type::String {
            let _ = writeln!(out, "(assert (str.in_re {} (re.* {})))", symbol(name), scalar_re());
        }
    }
    for c in constraints {
        let _ = writeln!(out, "(assert {})", constraint_term(c));
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

fn scalar_re() -> String {
    format!("(re.union {} {})", char_range(0, 0xD7FF).expect("range"), char_range(0xE000, SMT_MAX_CHAR).expect("range"))
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    Str(String),
    List(Vec<Sexp>),
}

fn tokenize_sexps(text: &str) -> Result<Vec<Sexp>, SmtError> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut out = Vec::new();
    loop {
        skip_ws(&chars, &mut pos);
        if pos >= chars.len() {
            return Ok(out);
        }
        out.push(parse_sexp(&chars, &mut pos)?);
    }
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() {
        if chars[*pos] == ';' {
            while *pos < chars.len() && chars[*pos] != '\n' {
                *pos += 1;
            }
        } else if chars[*pos].is_whitespace() {
            *pos += 1;
        } else {
            break;
        }
    }
}

fn parse_sexp(chars: &[char], pos: &mut usize) -> Result<Sexp, SmtError> {
    let bad = |m: &str| SmtError::MalformedSolverOutput(m.to_string());
    skip_ws(chars, pos);
    match chars.get(*pos) {
        None => Err(bad("unexpected end of output")),
        Some('(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(chars, pos);
                match chars.get(*pos) {
                    None => return Err(bad("unbalanced parentheses")),
                    Some(')') => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    _ => items.push(parse_sexp(chars, pos)?),
                }
            }
        }
        Some(')') => Err(bad("unexpected `)`")),
        Some('"') => {
            *pos += 1;
            let mut s = String::new();
            loop {
                match chars.get(*pos) {
                    None => return Err(bad("unterminated string")),
                    Some('"') if chars.get(*pos + 1) == Some(&'"') => {
                        s.push('"');
                        *pos += 2;
                    }
                    Some('"') => {
                        *pos += 1;
                        return Ok(Sexp::Str(unescape(&s)?));
                    }
                    Some(c) => {
                        s.push(*c);
                        *pos += 1;
                    }
                }
            }
        }
        Some('|') => {
            *pos += 1;
            let start = *pos;
            while chars.get(*pos).is_some_and(|c| *c != '|') {
                *pos += 1;
            }
            if *pos >= chars.len() {
                return Err(bad("unterminated quoted symbol"));
            }
            let s: String = chars[start..*pos].iter().collect();
            *pos += 1;
            Ok(Sexp::Atom(s))
        }
        Some(_) => {
            let start = *pos;
            while chars.get(*pos).is_some_and(|c| !c.is_whitespace() && !"()\";".contains(*c)) {
                *pos += 1;
            }
            Ok(Sexp::Atom(chars[start..*pos].iter().collect()))
        }
    }
}

/// Resolves `\u{..}`, `\uXXXX` and `\ud{..}` escapes.
fn unescape(s: &str) -> Result<String, SmtError> {
    let bad = || SmtError::MalformedSolverOutput(format!("bad escape in string {s:?}"));
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '\\' && chars.get(i + 1) == Some(&'u') {
            let (digits, next) = if chars.get(i + 2) == Some(&'{') {
                let end = chars[i + 3..].iter().position(|c| *c == '}').ok_or_else(bad)? + i + 3;
                (chars[i + 3..end].iter().collect::<String>(), end + 1)
            } else if i + 6 <= chars.len() {
                (chars[i + 2..i + 6].iter().collect::<String>(), i + 6)
            } else {
                out.push(chars[i]);
                i += 1;
                continue;
            };
            match u32::from_str_radix(&digits, 16).ok().and_then(char::from_u32) {
                Some(c) => out.push(c),
                None => return Err(bad()),
            }
            i = next;
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    Ok(out)
}

fn value_of(sexp: &Sexp, ty: &str) -> Result<Value, SmtError> {
    let bad = || SmtError::MalformedSolverOutput(format!("unexpected {ty} value {sexp:?}"));
    match (ty, sexp) {
        ("Int", Sexp::Atom(a)) => a.parse::<BigInt>().map(Value::Int).map_err(|_| bad()),
        ("Int", Sexp::List(items)) => match items.as_slice() {
            [Sexp::Atom(minus), inner] if minus == "-" => match value_of(inner, ty)? {
                Value::Int(v) => Ok(Value::Int(-v)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        },
        ("Bool", Sexp::Atom(a)) if a == "true" || a == "false" => Ok(Value::Bool(a == "true")),
        ("String", Sexp::Str(s)) => Ok(Value::Str(s.clone())),
        _ => Err(bad()),
    }
}

/// Parses a solver's answer to an [`emit_smtlib`] script.
pub fn parse_smtlib_result(text: &str) -> Result<SatResult, SmtError> {
    let sexps = tokenize_sexps(text)?;
    let bad = |m: String| SmtError::MalformedSolverOutput(m);
    let Some(Sexp::Atom(verdict)) = sexps.first() else {
        return Err(bad("missing verdict".into()));
    };
    match verdict.as_str() {
        "unsat" => Ok(SatResult::Unsat),
        "unknown" => Ok(SatResult::Unknown("backend answered unknown".into())),
        "sat" => {
            let mut model = Model::new();
            let items = match sexps.get(1) {
                Some(Sexp::List(items)) => items.as_slice(),
                _ => return Err(bad("missing model".into())),
            };
            let items = match items.first() {
                Some(Sexp::Atom(a)) if a == "model" => &items[1..],
                _ => items,
            };
            for def in items {
                match def {
                    Sexp::List(parts) => match parts.as_slice() {
                        [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), Sexp::Atom(ty), value]
                            if kw == "define-fun" && args.is_empty() =>
                        {
                            model.insert(name.clone(), value_of(value, ty)?);
                        }
                        _ => return Err(bad(format!("unexpected model entry {def:?}"))),
                    },
                    _ => return Err(bad(format!("unexpected model entry {def:?}"))),
                }
            }
            Ok(SatResult::Sat(model))
        }
        other => Err(bad(format!("unexpected verdict `{other}`"))),
    }
}

/// An SMT-LIB solver run as a child process, one process per query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessBackend {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl ProcessBackend {
    /// Splits a command line on whitespace.
    pub fn from_command(cmd: &str, timeout: Duration) -> Option<ProcessBackend> {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(ProcessBackend { program, args: parts.collect(), timeout })
    }

    pub fn check(&self, constraints: &[Constraint]) -> Result<SatResult, SmtError> {
        let script = emit_smtlib(constraints);
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SmtError::BackendUnavailable(format!("{}: {e}", self.program)))?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            // A solver that exits early closes the pipe; its output decides.
            let _ = stdin.write_all(script.as_bytes());
        }
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut buf = String::new();
            let _ = stdout.read_to_string(&mut buf);
            buf
        });
        match child.wait_timeout(self.timeout) {
            Ok(Some(_)) => {}
            Ok(None) => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(SmtError::Timeout(self.timeout));
            }
            Err(e) => return Err(SmtError::BackendUnavailable(e.to_string())),
        }
        let output = reader.join().map_err(|_| SmtError::MalformedSolverOutput("reader panicked".into()))?;
        parse_smtlib_result(&output)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emits_declarations_and_asserts() {
        let c = Constraint::IntCmp { op: CmpOp::Eq, lhs: IntExpr::Var("x".into()), rhs: IntExpr::Const(3.into()) };
        let text = emit_smtlib(&[c]);
        assert!(text.contains("(declare-const x Int)"));
        assert!(text.contains("(assert (= x 3))"));
    }

    #[test]
    fn regex_uses_range_and_loop() {
        let c = Constraint::str_matches("s", "[0-9a-z-]{1,64}", true).unwrap();
        let text = emit_smtlib(&[c]);
        assert!(text.contains("re.range"));
        assert!(text.contains("(_ re.loop 1 64)"));
    }

    #[test]
    fn parses_models() {
        let out = "sat\n(\n  (define-fun x () Int (- 4))\n  (define-fun s () String \"a\"\"\\u{2d}\")\n  (define-fun b () Bool true)\n)\n";
        let SatResult::Sat(m) = parse_smtlib_result(out).unwrap() else { panic!() };
        assert_eq!(m["x"], Value::Int((-4).into()));
        assert_eq!(m["s"], Value::Str("a\"-".into()));
        assert_eq!(m["b"], Value::Bool(true));
        assert_eq!(parse_smtlib_result("unsat\n").unwrap(), SatResult::Unsat);
        assert!(parse_smtlib_result("garbage (").is_err());
    }

    #[test]
    fn quoting_round_trips() {
        let s = "a\"b\\c\u{7f}é";
        let q = quote_string(s);
        let parsed = tokenize_sexps(&q).unwrap();
        assert_eq!(parsed, vec![Sexp::Str(s.into())]);
    }
}
