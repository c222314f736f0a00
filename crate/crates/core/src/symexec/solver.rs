//! Built-in constraint solver.
//!
//! Constraints are split into partitions of connected symbols. Strings are
//! decided exactly with automata; integers are narrowed to intervals from
//! unit constraints and then searched in a bounded window. Only automata
//! emptiness and interval refutation count as proofs of unsatisfiability;
//! an exhausted search is reported as unknown. Every model is checked
//! against all constraints before it is returned.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::lang::cfg::Pattern;
use crate::lang::Type;

use super::automata::{AutomataError, Dfa, DEFAULT_STATE_BUDGET};
use super::constraint::{Atom, CmpOp, Constraint, EvalError, IntExpr, Linear, Model, Value};
use super::smtlib::ProcessBackend;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Integers are searched within `[-int_bound, int_bound]`, or a window of
    /// the same width next to an interval that excludes zero.
    pub int_bound: i64,
    /// Longest string length modeled by length-counting automata.
    pub max_string_len: usize,
    /// Maximum constraint evaluations during integer search.
    pub search_budget: usize,
    pub state_budget: usize,
    /// Consulted when the built-in solver is inconclusive.
    pub backend: Option<ProcessBackend>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            int_bound: 1024,
            max_string_len: 256,
            search_budget: 200_000,
            state_budget: DEFAULT_STATE_BUDGET,
            backend: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", content = "detail", rename_all = "lowercase")]
pub enum SatResult {
    Sat(Model),
    Unsat,
    Unknown(String),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SatResult::Unsat)
    }
}

/// Decides the conjunction of `constraints`.
pub fn check_sat(constraints: &[Constraint], config: &SolverConfig) -> SatResult {
    // Path conditions repeat the same branch many times.
    let mut seen = HashSet::new();
    let unique: Vec<Constraint> = constraints.iter().filter(|c| seen.insert(*c)).cloned().collect();
    let constraints = unique.as_slice();
    let internal = check_internal(constraints, config);
    match (&internal, &config.backend) {
        (SatResult::Unknown(reason), Some(backend)) => match backend.check(constraints) {
            Ok(SatResult::Sat(mut model)) => {
                for (symbol, ty) in sorts(constraints).unwrap_or_default() {
                    model.entry(symbol).or_insert_with(|| Value::default_of(ty));
                }
                verify(constraints, model)
            }
            Ok(SatResult::Unsat) => SatResult::Unsat,
            Ok(SatResult::Unknown(r)) => SatResult::Unknown(format!("{reason}; backend: {r}")),
            Err(e) => SatResult::Unknown(format!("{reason}; backend: {e}")),
        },
        _ => internal,
    }
}

fn sorts(constraints: &[Constraint]) -> Result<BTreeMap<String, Type>, String> {
    let mut sorts: BTreeMap<String, Type> = BTreeMap::new();
    for c in constraints {
        for (symbol, ty) in c.symbols() {
            if let Some(prev) = sorts.insert(symbol.clone(), ty) {
                if prev != ty {
                    return Err(format!("symbol `{symbol}` used as {prev} and {ty}"));
                }
            }
        }
    }
    Ok(sorts)
}

fn verify(constraints: &[Constraint], model: Model) -> SatResult {
    for c in constraints {
        match c.eval(&model) {
            Ok(true) => {}
            Ok(false) => return SatResult::Unknown(format!("candidate model violates `{c}`")),
            Err(e) => return SatResult::Unknown(format!("cannot evaluate `{c}`: {e:?}")),
        }
    }
    SatResult::Sat(model)
}

fn check_internal(constraints: &[Constraint], config: &SolverConfig) -> SatResult {
    let sorts = match sorts(constraints) {
        Ok(s) => s,
        Err(e) => return SatResult::Unknown(e),
    };

    // Union-find over symbols.
    let names: Vec<&String> = sorts.keys().collect();
    let index: BTreeMap<&String, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut parent: Vec<usize> = (0..names.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    let mut ground = Vec::new();
    for c in constraints {
        let syms: Vec<usize> = c.symbols().keys().map(|s| index[s]).collect();
        match syms.split_first() {
            None => ground.push(c),
            Some((first, rest)) => {
                for s in rest {
                    let (a, b) = (find(&mut parent, *first), find(&mut parent, *s));
                    parent[a] = b;
                }
            }
        }
    }
    for c in ground {
        match c.eval(&Model::new()) {
            Ok(true) => {}
            Ok(false) => return SatResult::Unsat,
            Err(e) => return SatResult::Unknown(format!("cannot evaluate `{c}`: {e:?}")),
        }
    }
    let mut partitions: BTreeMap<usize, Vec<&Constraint>> = BTreeMap::new();
    for c in constraints {
        if let Some(first) = c.symbols().keys().next() {
            let root = find(&mut parent, index[first]);
            partitions.entry(root).or_default().push(c);
        }
    }

    let mut model = Model::new();
    let mut unknown: Option<String> = None;
    for part in partitions.values() {
        match solve_partition(part, &sorts, config) {
            SatResult::Sat(m) => model.extend(m),
            SatResult::Unsat => return SatResult::Unsat,
            SatResult::Unknown(r) => {
                unknown.get_or_insert(r);
            }
        }
    }
    if let Some(reason) = unknown {
        return SatResult::Unknown(reason);
    }
    verify(constraints, model)
}

const DFA_CACHE_LIMIT: usize = 256;

/// Compiles `pattern`, reusing automata built by earlier calls.
fn compiled(pattern: &Pattern, budget: usize) -> Result<Dfa, AutomataError> {
    static CACHE: OnceLock<Mutex<HashMap<(String, usize), Dfa>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (pattern.source.clone(), budget);
    if let Some(d) = cache.lock().expect("cache poisoned").get(&key) {
        return Ok(d.clone());
    }
    let d = Dfa::from_regex(&pattern.ast, budget)?;
    let mut map = cache.lock().expect("cache poisoned");
    if map.len() >= DFA_CACHE_LIMIT {
        map.clear();
    }
    map.insert(key, d.clone());
    Ok(d)
}

/// Per-string automaton built from the unit string constraints.
struct StringDomain {
    dfa: Dfa,
    /// False when a length bound beyond the modeled maximum was cut off.
    exact: bool,
}

#[derive(Debug, Clone)]
struct Interval {
    lo: Option<BigInt>,
    hi: Option<BigInt>,
    excluded: BTreeSet<BigInt>,
}

impl Interval {
    fn full() -> Self {
        Interval { lo: None, hi: None, excluded: BTreeSet::new() }
    }

    fn contains(&self, v: &BigInt) -> bool {
        self.lo.as_ref().is_none_or(|lo| v >= lo) && self.hi.as_ref().is_none_or(|hi| v <= hi) && !self.excluded.contains(v)
    }

    fn is_empty(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Some(lo), Some(hi)) => {
                if lo > hi {
                    return true;
                }
                // Every value in a small closed interval may be excluded.
                let width = hi - lo + BigInt::one();
                width <= BigInt::from(self.excluded.len())
                    && num_iter(lo, hi).all(|v| self.excluded.contains(&v))
            }
            _ => false,
        }
    }

    /// Applies `coeff * x + constant op 0`.
    fn narrow(&mut self, coeff: &BigInt, constant: &BigInt, op: CmpOp) {
        // Normalize to x op' bound with a positive coefficient.
        let (op, c, k) = if coeff.is_negative() { (op.flip(), -coeff, -constant) } else { (op, coeff.clone(), constant.clone()) };
        // c * x op -k
        let target = -k;
        let floor = floor_div(&target, &c);
        let ceil = ceil_div(&target, &c);
        let exact = (&target % &c).is_zero();
        match op {
            CmpOp::Lt => self.set_hi(if exact { floor - 1 } else { floor }),
            CmpOp::Le => self.set_hi(floor),
            CmpOp::Gt => self.set_lo(if exact { ceil + 1 } else { ceil }),
            CmpOp::Ge => self.set_lo(ceil),
            CmpOp::Eq => {
                if exact {
                    self.set_lo(floor.clone());
                    self.set_hi(floor);
                } else {
                    self.set_lo(BigInt::one());
                    self.set_hi(BigInt::zero());
                }
            }
            CmpOp::Ne => {
                if exact {
                    self.excluded.insert(floor);
                }
            }
        }
    }

    fn set_lo(&mut self, v: BigInt) {
        if self.lo.as_ref().is_none_or(|lo| &v > lo) {
            self.lo = Some(v);
        }
    }

    fn set_hi(&mut self, v: BigInt) {
        if self.hi.as_ref().is_none_or(|hi| &v < hi) {
            self.hi = Some(v);
        }
    }

    /// Search candidates: nearest to zero first when zero is inside,
    /// otherwise outward from the bound nearest to zero.
    fn candidates(&self, bound: i64) -> Vec<BigInt> {
        let b = BigInt::from(bound);
        let width = 2 * bound;
        let mut out = Vec::new();
        let lo_in = self.lo.as_ref().is_none_or(|lo| lo <= &BigInt::zero());
        let hi_in = self.hi.as_ref().is_none_or(|hi| hi >= &BigInt::zero());
        if lo_in && hi_in {
            out.push(BigInt::zero());
            for i in 1..=bound {
                out.push(BigInt::from(i));
                out.push(BigInt::from(-i));
            }
            let _ = b;
        } else if !lo_in {
            let lo = self.lo.clone().expect("lower bound");
            out.extend(num_iter(&lo, &(&lo + BigInt::from(width))));
        } else {
            let hi = self.hi.clone().expect("upper bound");
            let mut v = hi.clone();
            for _ in 0..=width {
                out.push(v.clone());
                v -= 1;
            }
        }
        out.retain(|v| self.contains(v));
        out
    }
}

fn num_iter(lo: &BigInt, hi: &BigInt) -> impl Iterator<Item = BigInt> {
    let mut cur = lo.clone();
    let hi = hi.clone();
    std::iter::from_fn(move || {
        if cur > hi {
            return None;
        }
        let v = cur.clone();
        cur += 1;
        Some(v)
    })
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    let q = a / b;
    if (a % b != BigInt::zero()) && ((a < &BigInt::zero()) != (b < &BigInt::zero())) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -floor_div(&-a, b)
}

/// Length automaton for `coeff * len + constant op 0`, exact when the
/// truth value settles within the modeled maximum.
fn length_dfa(coeff: &BigInt, constant: &BigInt, op: CmpOp, max_len: usize) -> (Dfa, bool) {
    let holds = |l: usize| {
        let v = coeff * BigInt::from(l) + constant;
        op.holds(&v, &BigInt::zero())
    };
    // Beyond |constant| / |coeff| + 1 the sign of the left side is fixed.
    let settle = (constant.abs() / coeff.abs().max(BigInt::one()) + 2u32).to_usize();
    match settle {
        Some(t) if t <= max_len => (Dfa::length(holds, t, holds(t + 1)), true),
        _ => (Dfa::length(holds, max_len, false), false),
    }
}

fn solve_partition(part: &[&Constraint], sorts: &BTreeMap<String, Type>, config: &SolverConfig) -> SatResult {
    let mut symbols = BTreeMap::new();
    for c in part {
        symbols.extend(c.symbols());
    }
    let _ = sorts;

    let mut bools: BTreeMap<String, bool> = BTreeMap::new();
    let mut strings: BTreeMap<String, StringDomain> = BTreeMap::new();
    let mut ints: BTreeMap<String, Interval> = BTreeMap::new();
    let mut multi: Vec<(&Constraint, Option<(Linear, CmpOp)>)> = Vec::new();
    let mut opaque: Option<String> = None;

    for (name, ty) in &symbols {
        match ty {
            Type::String => {
                strings.insert(name.clone(), StringDomain { dfa: Dfa::universal(), exact: true });
            }
            Type::Int => {
                ints.insert(name.clone(), Interval::full());
            }
            Type::Bool => {}
        }
    }

    let intersect = |dom: &mut StringDomain, other: Dfa| -> Result<(), String> {
        dom.dfa = dom
            .dfa
            .product(&other, super::automata::ProductMode::Intersect, config.state_budget)
            .map_err(|e| e.to_string())?;
        Ok(())
    };

    for c in part {
        let result: Result<(), String> = match c {
            Constraint::BoolAtom { symbol, expected } => {
                if let Some(prev) = bools.insert(symbol.clone(), *expected) {
                    if prev != *expected {
                        return SatResult::Unsat;
                    }
                }
                Ok(())
            }
            Constraint::StrMatches { symbol, pattern, positive } => {
                match compiled(pattern, config.state_budget) {
                    Ok(d) => intersect(strings.get_mut(symbol).expect("string symbol"), if *positive { d } else { d.complement() }),
                    Err(e) => Err(e.to_string()),
                }
            }
            Constraint::StrEq { symbol, literal, positive } => {
                let d = Dfa::literal(literal);
                intersect(strings.get_mut(symbol).expect("string symbol"), if *positive { d } else { d.complement() })
            }
            Constraint::StrLen { op, symbol, bound } => {
                let (d, exact) = length_dfa(&BigInt::one(), &-BigInt::from(*bound), *op, config.max_string_len);
                let dom = strings.get_mut(symbol).expect("string symbol");
                dom.exact &= exact;
                intersect(dom, d)
            }
            Constraint::IntCmp { op, lhs, rhs } => {
                let linear = lhs.linear().zip(rhs.linear()).map(|(l, r)| {
                    let neg = Linear { terms: r.terms.iter().map(|(a, c)| (a.clone(), -c)).collect(), constant: -r.constant };
                    let mut sum = l;
                    for (a, c) in neg.terms {
                        *sum.terms.entry(a).or_insert_with(BigInt::zero) += c;
                    }
                    sum.terms.retain(|_, c| !c.is_zero());
                    sum.constant += neg.constant;
                    sum
                });
                match linear {
                    Some(lin) if lin.terms.is_empty() => {
                        if op.holds(&lin.constant, &BigInt::zero()) {
                            Ok(())
                        } else {
                            return SatResult::Unsat;
                        }
                    }
                    Some(lin) if lin.terms.len() == 1 => {
                        let (atom, coeff) = lin.terms.iter().next().expect("one term");
                        match atom {
                            Atom::Var(v) => {
                                ints.get_mut(v).expect("int symbol").narrow(coeff, &lin.constant, *op);
                                Ok(())
                            }
                            Atom::Len(s) => {
                                let (d, exact) = length_dfa(coeff, &lin.constant, *op, config.max_string_len);
                                let dom = strings.get_mut(s).expect("string symbol");
                                dom.exact &= exact;
                                intersect(dom, d)
                            }
                        }
                    }
                    Some(lin) => {
                        multi.push((c, Some((lin, *op))));
                        Ok(())
                    }
                    None => {
                        opaque.get_or_insert_with(|| format!("nonlinear constraint `{c}` is not supported"));
                        multi.push((c, None));
                        Ok(())
                    }
                }
            }
            Constraint::Opaque { .. } => {
                opaque.get_or_insert_with(|| format!("constraint `{c}` is outside the supported fragment"));
                Ok(())
            }
        };
        if let Err(reason) = result {
            return SatResult::Unknown(reason);
        }
    }

    // Proofs first: empty automata and empty intervals.
    let mut inexact_empty = false;
    for dom in strings.values() {
        if dom.dfa.is_empty() {
            if dom.exact {
                return SatResult::Unsat;
            }
            inexact_empty = true;
        }
    }
    for interval in ints.values() {
        if interval.is_empty() {
            return SatResult::Unsat;
        }
    }
    if let Some(reason) = opaque {
        return SatResult::Unknown(reason);
    }
    if inexact_empty {
        return SatResult::Unknown(format!("string lengths beyond {} are not modeled", config.max_string_len));
    }

    let mut model = Model::new();
    for (name, value) in &bools {
        model.insert(name.clone(), Value::Bool(*value));
    }

    // Atoms the multi-variable constraints range over.
    let mut search_atoms: BTreeSet<Atom> = BTreeSet::new();
    for (_, lin) in &multi {
        if let Some((lin, _)) = lin {
            search_atoms.extend(lin.terms.keys().cloned());
        }
    }
    for (name, interval) in &ints {
        if !search_atoms.contains(&Atom::Var(name.clone())) {
            match interval.candidates(config.int_bound).into_iter().next() {
                Some(v) => {
                    model.insert(name.clone(), Value::Int(v));
                }
                None => return SatResult::Unknown(format!("no value for `{name}` within the search window")),
            }
        }
    }
    for (name, dom) in &strings {
        if !search_atoms.contains(&Atom::Len(name.clone())) {
            model.insert(name.clone(), Value::Str(dom.dfa.witness().expect("non-empty automaton")));
        }
    }
    if search_atoms.is_empty() {
        return SatResult::Sat(model);
    }

    let atoms: Vec<Atom> = search_atoms.into_iter().collect();
    let domains: Vec<Vec<BigInt>> = atoms
        .iter()
        .map(|a| match a {
            Atom::Var(v) => ints[v].candidates(config.int_bound),
            Atom::Len(s) => strings[s]
                .dfa
                .lengths(config.max_string_len)
                .into_iter()
                .enumerate()
                .filter(|(_, ok)| *ok)
                .map(|(l, _)| BigInt::from(l))
                .collect(),
        })
        .collect();
    let linear: Vec<(Linear, CmpOp)> = multi.into_iter().filter_map(|(_, l)| l).collect();
    let ranges = atoms
        .iter()
        .zip(&domains)
        .filter_map(|(a, d)| Some((a.clone(), (d.iter().min()?.clone(), d.iter().max()?.clone()))))
        .collect();
    let mut search = Search {
        atoms: &atoms,
        domains: &domains,
        constraints: &linear,
        budget: config.search_budget,
        assignment: BTreeMap::new(),
        ranges,
    };
    if !search.consistent() || !search.run(0) {
        return SatResult::Unknown(if search.budget == 0 {
            "search budget exhausted".into()
        } else {
            "no model within the search window".into()
        });
    }
    for (atom, value) in search.assignment {
        match atom {
            Atom::Var(v) => {
                model.insert(v, Value::Int(value));
            }
            Atom::Len(s) => {
                let len = value.to_usize().expect("modeled length");
                let witness = strings[&s].dfa.witness_of_length(len).expect("length is achievable");
                model.insert(s, Value::Str(witness));
            }
        }
    }
    SatResult::Sat(model)
}

struct Search<'a> {
    atoms: &'a [Atom],
    domains: &'a [Vec<BigInt>],
    constraints: &'a [(Linear, CmpOp)],
    budget: usize,
    assignment: BTreeMap<Atom, BigInt>,
    /// Smallest and largest candidate of every atom with a non-empty domain.
    ranges: BTreeMap<Atom, (BigInt, BigInt)>,
}

impl Search<'_> {
    fn consistent(&mut self) -> bool {
        for (lin, op) in self.constraints {
            if self.budget == 0 {
                return false;
            }
            self.budget -= 1;
            // Range of the left side over the remaining domains.
            let mut lo = lin.constant.clone();
            let mut hi = lin.constant.clone();
            for (atom, coeff) in &lin.terms {
                match self.assignment.get(atom) {
                    Some(v) => {
                        lo += coeff * v;
                        hi += coeff * v;
                    }
                    None => {
                        let Some((min, max)) = self.ranges.get(atom) else { return false };
                        let (a, b) = (coeff * min, coeff * max);
                        if a <= b {
                            lo += a;
                            hi += b;
                        } else {
                            lo += b;
                            hi += a;
                        }
                    }
                }
            }
            let zero = BigInt::zero();
            let possible = match op {
                CmpOp::Lt => lo < zero,
                CmpOp::Le => lo <= zero,
                CmpOp::Gt => hi > zero,
                CmpOp::Ge => hi >= zero,
                CmpOp::Eq => lo <= zero && zero <= hi,
                CmpOp::Ne => !(lo.is_zero() && hi.is_zero()),
            };
            if !possible {
                return false;
            }
        }
        true
    }

    /// A value forced by an equality whose other atoms are all assigned.
    fn forced(&self, atom: &Atom) -> Option<Option<BigInt>> {
        for (lin, op) in self.constraints {
            if *op != CmpOp::Eq {
                continue;
            }
            let Some(coeff) = lin.terms.get(atom) else { continue };
            let mut rest = lin.constant.clone();
            let mut complete = true;
            for (a, c) in &lin.terms {
                if a == atom {
                    continue;
                }
                match self.assignment.get(a) {
                    Some(v) => rest += c * v,
                    None => complete = false,
                }
            }
            if complete {
                let target = -rest;
                if (&target % coeff).is_zero() {
                    return Some(Some(target / coeff));
                }
                return Some(None);
            }
        }
        None
    }

    fn run(&mut self, depth: usize) -> bool {
        if depth == self.atoms.len() {
            return true;
        }
        let atom = self.atoms[depth].clone();
        let candidates: Vec<BigInt> = match self.forced(&atom) {
            Some(Some(v)) => {
                if self.domains[depth].contains(&v) {
                    vec![v]
                } else {
                    vec![]
                }
            }
            Some(None) => vec![],
            None => self.domains[depth].clone(),
        };
        for v in candidates {
            if self.budget == 0 {
                return false;
            }
            self.assignment.insert(atom.clone(), v);
            if self.consistent() && self.run(depth + 1) {
                return true;
            }
            self.assignment.remove(&atom);
        }
        false
    }
}

impl From<EvalError> for SatResult {
    fn from(e: EvalError) -> Self {
        SatResult::Unknown(format!("{e:?}"))
    }
}

/// Convenience for tests and the CLI: `x op c` over an int symbol.
pub fn int_unit(symbol: &str, op: CmpOp, c: i64) -> Constraint {
    Constraint::IntCmp { op, lhs: IntExpr::Var(symbol.into()), rhs: IntExpr::Const(BigInt::from(c)) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_refutation_is_unsat() {
        let cs = [int_unit("x", CmpOp::Gt, 5), int_unit("x", CmpOp::Lt, 3)];
        assert_eq!(check_sat(&cs, &SolverConfig::default()), SatResult::Unsat);
    }

    #[test]
    fn nonlinear_is_unknown() {
        let x = || Box::new(IntExpr::Var("x".into()));
        let c = Constraint::IntCmp { op: CmpOp::Eq, lhs: IntExpr::Mul(x(), x()), rhs: IntExpr::Const(2.into()) };
        assert!(matches!(check_sat(&[c], &SolverConfig::default()), SatResult::Unknown(_)));
    }

    #[test]
    fn single_dash_witness() {
        let cs = [
            Constraint::str_matches("s", "[0-9a-z-]{1,64}", true).unwrap(),
            Constraint::str_matches("s", "[0-9a-z]([0-9a-z-]{0,62}[0-9a-z])?", false).unwrap(),
        ];
        let SatResult::Sat(model) = check_sat(&cs, &SolverConfig::default()) else { panic!() };
        assert_eq!(model["s"], Value::Str("-".into()));
    }

    #[test]
    fn equality_is_solved_directly() {
        let cs = [Constraint::IntCmp {
            op: CmpOp::Eq,
            lhs: IntExpr::Add(Box::new(IntExpr::Var("x".into())), Box::new(IntExpr::Var("y".into()))),
            rhs: IntExpr::Const(2000.into()),
        }];
        assert!(check_sat(&cs, &SolverConfig::default()).is_sat());
    }

    #[test]
    fn mixed_length_and_int() {
        let cs = [
            Constraint::str_matches("s", "a+", true).unwrap(),
            Constraint::IntCmp { op: CmpOp::Eq, lhs: IntExpr::Len("s".into()), rhs: IntExpr::Var("n".into()) },
            int_unit("n", CmpOp::Ge, 3),
        ];
        let SatResult::Sat(model) = check_sat(&cs, &SolverConfig::default()) else { panic!() };
        assert_eq!(model["s"], Value::Str("aaa".into()));
    }

    #[test]
    fn excluded_points_empty_interval() {
        let cs = [
            int_unit("x", CmpOp::Ge, 1),
            int_unit("x", CmpOp::Le, 2),
            int_unit("x", CmpOp::Ne, 1),
            int_unit("x", CmpOp::Ne, 2),
        ];
        assert_eq!(check_sat(&cs, &SolverConfig::default()), SatResult::Unsat);
    }
}
