//! Regex to DFA via Thompson construction and subset construction, plus
//! product, complement, emptiness and shortest witnesses.
//!
//! A DFA's alphabet is a partition of the scalar range into half-open
//! intervals. The surrogate gap is always its own class and is never taken
//! by a string, so it is ignored by every query.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::regex::{char_at_or_after, RegexAst, MAX_SCALAR};

pub const DEFAULT_STATE_BUDGET: usize = 100_000;

const END: u32 = MAX_SCALAR + 1;
const SURROGATES: (u32, u32) = (0xD800, 0xE000);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error("automaton exceeds the budget of {0} states")]
    StateBudgetExceeded(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    /// Class `i` covers `bounds[i]..bounds[i + 1]`.
    bounds: Vec<u32>,
}

impl Alphabet {
    fn from_cuts(mut cuts: Vec<u32>) -> Self {
        cuts.extend([0, END, SURROGATES.0, SURROGATES.1]);
        cuts.retain(|&c| c <= END);
        cuts.sort_unstable();
        cuts.dedup();
        Alphabet { bounds: cuts }
    }

    /// The trivial partition: everything in one class besides surrogates.
    pub fn trivial() -> Self {
        Self::from_cuts(Vec::new())
    }

    /// Partition whose classes never straddle an endpoint of `intervals`.
    pub fn covering(intervals: &[(u32, u32)]) -> Self {
        Self::from_cuts(intervals.iter().flat_map(|&(lo, hi)| [lo, hi + 1]).collect())
    }

    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn class_of(&self, c: char) -> usize {
        let v = c as u32;
        self.bounds.partition_point(|&b| b <= v) - 1
    }

    /// Inclusive scalar range of a class.
    pub fn range(&self, class: usize) -> (u32, u32) {
        (self.bounds[class], self.bounds[class + 1] - 1)
    }

    /// A character of the class, `None` for the surrogate gap. Prefers `a`,
    /// then the smallest visible ASCII character, then the smallest.
    pub fn representative(&self, class: usize) -> Option<char> {
        let (lo, hi) = self.range(class);
        if lo == SURROGATES.0 {
            return None;
        }
        if (lo..=hi).contains(&('a' as u32)) {
            return Some('a');
        }
        if lo <= 0x7e && hi >= 0x21 {
            return char::from_u32(lo.max(0x21));
        }
        char_at_or_after(lo)
    }

    fn refine(&self, other: &Alphabet) -> Alphabet {
        Self::from_cuts(self.bounds.iter().chain(&other.bounds).copied().collect())
    }
}

/// Deterministic automaton with a total transition function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    /// Row-major `state * classes + class`.
    transitions: Vec<u32>,
    accepting: Vec<bool>,
    start: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductMode {
    Intersect,
    Difference,
}

struct Nfa {
    eps: Vec<Vec<u32>>,
    edges: Vec<Vec<(u32, u32, u32)>>,
    budget: usize,
}

impl Nfa {
    fn state(&mut self) -> Result<u32, AutomataError> {
        if self.eps.len() >= self.budget {
            return Err(AutomataError::StateBudgetExceeded(self.budget));
        }
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        Ok((self.eps.len() - 1) as u32)
    }

    fn ranges(&mut self, ranges: &[(u32, u32)]) -> Result<(u32, u32), AutomataError> {
        let (s, e) = (self.state()?, self.state()?);
        for &(lo, hi) in ranges {
            self.edges[s as usize].push((lo, hi, e));
        }
        Ok((s, e))
    }

    fn epsilon(&mut self, from: u32, to: u32) {
        self.eps[from as usize].push(to);
    }

    /// Fragment `(start, end)` accepting exactly `ast`.
    fn build(&mut self, ast: &RegexAst) -> Result<(u32, u32), AutomataError> {
        match ast {
            RegexAst::Literal(c) => self.ranges(&[(*c as u32, *c as u32)]),
            RegexAst::AnyChar => self.ranges(&[(0, MAX_SCALAR)]),
            RegexAst::Class(class) => self.ranges(&class.scalar_ranges()),
            RegexAst::Concat(items) => {
                let (s, mut e) = {
                    let s = self.state()?;
                    (s, s)
                };
                for item in items {
                    let (is, ie) = self.build(item)?;
                    self.epsilon(e, is);
                    e = ie;
                }
                Ok((s, e))
            }
            RegexAst::Alt(items) => {
                let (s, e) = (self.state()?, self.state()?);
                for item in items {
                    let (is, ie) = self.build(item)?;
                    self.epsilon(s, is);
                    self.epsilon(ie, e);
                }
                Ok((s, e))
            }
            RegexAst::Star(node) => self.repeat(node, 0, None),
            RegexAst::Plus(node) => self.repeat(node, 1, None),
            RegexAst::Opt(node) => self.repeat(node, 0, Some(1)),
            RegexAst::Repeat { node, min, max } => self.repeat(node, *min, *max),
        }
    }

    fn repeat(&mut self, node: &RegexAst, min: u32, max: Option<u32>) -> Result<(u32, u32), AutomataError> {
        let s = self.state()?;
        let mut e = s;
        for _ in 0..min {
            let (is, ie) = self.build(node)?;
            self.epsilon(e, is);
            e = ie;
        }
        match max {
            None => {
                let (is, ie) = self.build(node)?;
                let out = self.state()?;
                self.epsilon(e, is);
                self.epsilon(ie, is);
                self.epsilon(ie, out);
                self.epsilon(e, out);
                Ok((s, out))
            }
            Some(max) => {
                let out = self.state()?;
                self.epsilon(e, out);
                for _ in min..max {
                    let (is, ie) = self.build(node)?;
                    self.epsilon(e, is);
                    self.epsilon(ie, out);
                    e = ie;
                }
                Ok((s, out))
            }
        }
    }

    fn closure(&self, set: &mut Vec<u32>) {
        let mut seen: std::collections::HashSet<u32> = set.iter().copied().collect();
        let mut stack = set.clone();
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s as usize] {
                if seen.insert(t) {
                    set.push(t);
                    stack.push(t);
                }
            }
        }
        set.sort_unstable();
        set.dedup();
    }
}

impl Dfa {
    pub fn from_regex(ast: &RegexAst, budget: usize) -> Result<Dfa, AutomataError> {
        let mut nfa = Nfa { eps: Vec::new(), edges: Vec::new(), budget };
        let (start, accept) = nfa.build(ast)?;
        let mut intervals = Vec::new();
        ast.intervals(&mut intervals);
        let alphabet = Alphabet::covering(&intervals);
        let classes = alphabet.len();

        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut sets: Vec<Vec<u32>> = Vec::new();
        let mut transitions = Vec::new();
        let mut accepting = Vec::new();
        let mut initial = vec![start];
        nfa.closure(&mut initial);
        ids.insert(initial.clone(), 0);
        sets.push(initial);
        let mut next = 0usize;
        while next < sets.len() {
            let set = sets[next].clone();
            accepting.push(set.contains(&accept));
            for class in 0..classes {
                let (lo, _) = alphabet.range(class);
                let mut moved: Vec<u32> = Vec::new();
                for &s in &set {
                    for &(elo, ehi, t) in &nfa.edges[s as usize] {
                        if elo <= lo && lo <= ehi {
                            moved.push(t);
                        }
                    }
                }
                nfa.closure(&mut moved);
                let id = match ids.get(&moved) {
                    Some(&id) => id,
                    None => {
                        if sets.len() >= budget {
                            return Err(AutomataError::StateBudgetExceeded(budget));
                        }
                        let id = sets.len() as u32;
                        ids.insert(moved.clone(), id);
                        sets.push(moved);
                        id
                    }
                };
                transitions.push(id);
            }
            next += 1;
        }
        Ok(Dfa { alphabet, transitions, accepting, start: 0 }.minimize())
    }

    /// Accepts exactly `text`.
    pub fn literal(text: &str) -> Dfa {
        let chars: Vec<char> = text.chars().collect();
        let alphabet = Alphabet::covering(&chars.iter().map(|&c| (c as u32, c as u32)).collect::<Vec<_>>());
        let classes = alphabet.len();
        let n = chars.len();
        let dead = (n + 1) as u32;
        let mut transitions = vec![dead; (n + 2) * classes];
        for (i, &c) in chars.iter().enumerate() {
            transitions[i * classes + alphabet.class_of(c)] = (i + 1) as u32;
        }
        let mut accepting = vec![false; n + 2];
        accepting[n] = true;
        Dfa { alphabet, transitions, accepting, start: 0 }
    }

    pub fn universal() -> Dfa {
        Self::length(|_| true, 0, true)
    }

    pub fn empty() -> Dfa {
        Self::length(|_| false, 0, false)
    }

    /// Strings whose length `l` satisfies `pred(l)` for `l <= upto`, and
    /// `tail` for every longer string.
    pub fn length(pred: impl Fn(usize) -> bool, upto: usize, tail: bool) -> Dfa {
        let alphabet = Alphabet::trivial();
        let classes = alphabet.len();
        let states = upto + 2;
        let mut transitions = Vec::with_capacity(states * classes);
        for s in 0..states {
            for _ in 0..classes {
                transitions.push((s + 1).min(states - 1) as u32);
            }
        }
        let accepting = (0..states).map(|l| if l <= upto { pred(l) } else { tail }).collect();
        Dfa { alphabet, transitions, accepting, start: 0 }.minimize()
    }

    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn step(&self, state: u32, class: usize) -> u32 {
        self.transitions[state as usize * self.alphabet.len() + class]
    }

    pub fn accepts(&self, text: &str) -> bool {
        let mut state = self.start;
        for c in text.chars() {
            state = self.step(state, self.alphabet.class_of(c));
        }
        self.accepting[state as usize]
    }

    pub fn complement(&self) -> Dfa {
        Dfa { accepting: self.accepting.iter().map(|a| !a).collect(), ..self.clone() }
    }

    pub fn product(&self, other: &Dfa, mode: ProductMode, budget: usize) -> Result<Dfa, AutomataError> {
        let alphabet = self.alphabet.refine(&other.alphabet);
        let classes = alphabet.len();
        // Class of the refined alphabet in each operand.
        let map: Vec<(usize, usize)> = (0..classes)
            .map(|c| {
                let (lo, _) = alphabet.range(c);
                (self.alphabet.class_of_scalar(lo), other.alphabet.class_of_scalar(lo))
            })
            .collect();
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs = vec![(self.start, other.start)];
        ids.insert((self.start, other.start), 0);
        let mut transitions = Vec::new();
        let mut accepting = Vec::new();
        let mut next = 0;
        while next < pairs.len() {
            let (a, b) = pairs[next];
            let (fa, fb) = (self.accepting[a as usize], other.accepting[b as usize]);
            accepting.push(match mode {
                ProductMode::Intersect => fa && fb,
                ProductMode::Difference => fa && !fb,
            });
            for &(ca, cb) in &map {
                let pair = (self.step(a, ca), other.step(b, cb));
                let id = match ids.get(&pair) {
                    Some(&id) => id,
                    None => {
                        if pairs.len() >= budget {
                            return Err(AutomataError::StateBudgetExceeded(budget));
                        }
                        let id = pairs.len() as u32;
                        ids.insert(pair, id);
                        pairs.push(pair);
                        id
                    }
                };
                transitions.push(id);
            }
            next += 1;
        }
        Ok(Dfa { alphabet, transitions, accepting, start: 0 }.minimize())
    }

    pub fn intersect(&self, other: &Dfa) -> Result<Dfa, AutomataError> {
        self.product(other, ProductMode::Intersect, DEFAULT_STATE_BUDGET)
    }

    /// Classes that some string can take, in ascending scalar order.
    fn usable_classes(&self) -> Vec<(usize, char)> {
        (0..self.alphabet.len()).filter_map(|c| self.alphabet.representative(c).map(|r| (c, r))).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.witness().is_none()
    }

    /// Shortest accepted string; among those, the one taking the smallest
    /// class representative at each position.
    pub fn witness(&self) -> Option<String> {
        let classes = self.usable_classes();
        let n = self.state_count();
        let mut parent: Vec<Option<(u32, char)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[self.start as usize] = true;
        let mut queue = VecDeque::from([self.start]);
        while let Some(s) = queue.pop_front() {
            if self.accepting[s as usize] {
                let mut out = Vec::new();
                let mut cur = s;
                while let Some((prev, c)) = parent[cur as usize] {
                    out.push(c);
                    cur = prev;
                }
                out.reverse();
                return Some(out.into_iter().collect());
            }
            for &(class, rep) in &classes {
                let t = self.step(s, class);
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    parent[t as usize] = Some((s, rep));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// `live[k][s]`: some string of exactly `k` more characters leads from
    /// `s` to acceptance.
    fn live_table(&self, upto: usize) -> Vec<Vec<bool>> {
        let classes = self.usable_classes();
        let mut table = vec![self.accepting.clone()];
        for k in 1..=upto {
            let prev = &table[k - 1];
            let row = (0..self.state_count())
                .map(|s| classes.iter().any(|&(c, _)| prev[self.step(s as u32, c) as usize]))
                .collect();
            table.push(row);
        }
        table
    }

    /// Which lengths `0..=upto` have an accepted string.
    pub fn lengths(&self, upto: usize) -> Vec<bool> {
        let table = self.live_table(upto);
        (0..=upto).map(|k| table[k][self.start as usize]).collect()
    }

    /// Smallest accepted string of exactly `len` characters.
    pub fn witness_of_length(&self, len: usize) -> Option<String> {
        let table = self.live_table(len);
        if !table[len][self.start as usize] {
            return None;
        }
        let classes = self.usable_classes();
        let mut state = self.start;
        let mut out = String::new();
        for remaining in (0..len).rev() {
            let &(class, rep) = classes
                .iter()
                .find(|&&(c, _)| table[remaining][self.step(state, c) as usize])
                .expect("live state has a live successor");
            out.push(rep);
            state = self.step(state, class);
        }
        Some(out)
    }

    /// Moore partition refinement; unreachable states are dropped first.
    pub fn minimize(self) -> Dfa {
        let classes = self.alphabet.len();
        let n = self.state_count();
        let mut reachable = vec![false; n];
        let mut order = vec![self.start];
        reachable[self.start as usize] = true;
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            for c in 0..classes {
                let t = self.step(s, c);
                if !reachable[t as usize] {
                    reachable[t as usize] = true;
                    order.push(t);
                }
            }
            i += 1;
        }
        let mut block: Vec<u32> = vec![0; n];
        for &s in &order {
            block[s as usize] = u32::from(self.accepting[s as usize]);
        }
        let mut count = 0;
        loop {
            let mut signatures: HashMap<Vec<u32>, u32> = HashMap::new();
            let mut next_block = vec![0u32; n];
            for &s in &order {
                let mut sig = Vec::with_capacity(classes + 1);
                sig.push(block[s as usize]);
                sig.extend((0..classes).map(|c| block[self.step(s, c) as usize]));
                let fresh = signatures.len() as u32;
                next_block[s as usize] = *signatures.entry(sig).or_insert(fresh);
            }
            let new_count = signatures.len();
            block = next_block;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        // Renumber so the start state is 0 and numbering follows discovery.
        let mut rename: HashMap<u32, u32> = HashMap::new();
        for &s in &order {
            let fresh = rename.len() as u32;
            rename.entry(block[s as usize]).or_insert(fresh);
        }
        let mut transitions = vec![0u32; count * classes];
        let mut accepting = vec![false; count];
        for &s in &order {
            let b = rename[&block[s as usize]] as usize;
            accepting[b] = self.accepting[s as usize];
            for c in 0..classes {
                transitions[b * classes + c] = rename[&block[self.step(s, c) as usize]];
            }
        }
        Dfa { alphabet: self.alphabet, transitions, accepting, start: 0 }
    }
}

impl Alphabet {
    fn class_of_scalar(&self, v: u32) -> usize {
        self.bounds.partition_point(|&b| b <= v) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::parse;

    fn dfa(pattern: &str) -> Dfa {
        Dfa::from_regex(&parse(pattern).unwrap(), DEFAULT_STATE_BUDGET).unwrap()
    }

    #[test]
    fn literal_and_star() {
        let a = dfa("a");
        assert!(a.accepts("a") && !a.accepts("") && !a.accepts("aa"));
        let ab = dfa("[a-b]*");
        assert!(ab.accepts("") && ab.accepts("a") && ab.accepts("ab") && !ab.accepts("c"));
    }

    #[test]
    fn bounded_repeat() {
        let d = dfa("[0-9a-z-]{1,64}");
        assert!(d.accepts("-"));
        assert!(!d.accepts(""));
        assert!(d.accepts(&"a".repeat(64)));
        assert!(!d.accepts(&"a".repeat(65)));
    }

    #[test]
    fn witness_is_shortest() {
        assert_eq!(dfa("abc|ab").witness().as_deref(), Some("ab"));
        assert_eq!(Dfa::empty().witness(), None);
        assert_eq!(Dfa::universal().witness().as_deref(), Some(""));
    }

    #[test]
    fn difference_of_name_patterns() {
        let buggy = dfa("[0-9a-z-]{1,64}");
        let strict = dfa("[0-9a-z]([0-9a-z-]{0,62}[0-9a-z])?");
        let diff = buggy.product(&strict, ProductMode::Difference, DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(diff.witness().as_deref(), Some("-"));
        let none = strict.product(&buggy, ProductMode::Difference, DEFAULT_STATE_BUDGET).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn complement_flips_membership() {
        let a = dfa("a").complement();
        assert!(a.accepts("") && a.accepts("b") && a.accepts("aa") && !a.accepts("a"));
        assert!(Dfa::empty().complement().accepts("anything"));
    }

    #[test]
    fn fixed_length_witness() {
        let d = dfa("[a-c]+x");
        assert_eq!(d.lengths(3), vec![false, false, true, true]);
        assert_eq!(d.witness_of_length(3).as_deref(), Some("aax"));
        assert_eq!(d.witness_of_length(1), None);
    }

    #[test]
    fn state_budget() {
        let err = Dfa::from_regex(&parse("(a{1000}){1000}").unwrap(), 1000).unwrap_err();
        assert_eq!(err, AutomataError::StateBudgetExceeded(1000));
    }
}
