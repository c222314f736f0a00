//! Backtracking regex matcher with its own parser.
//!
//! Matches are whole-string. A leading `^` and trailing `$` are accepted and
//! ignored. Repetition of a nullable body only continues while it consumes
//! input, so patterns like `(a*)*` terminate.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleError(pub String);

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "oracle pattern error: {}", self.0)
    }
}

impl std::error::Error for OracleError {}

#[derive(Debug, Clone)]
enum Node {
    Set { ranges: Vec<(char, char)>, negated: bool },
    Any,
    Seq(Vec<Node>),
    Alt(Vec<Node>),
    Repeat { node: Box<Node>, min: u32, max: Option<u32> },
}

/// A compiled backtracking matcher.
#[derive(Debug, Clone)]
pub struct Backtracker {
    root: Node,
}

fn class_escape(c: char) -> Option<(Vec<(char, char)>, bool)> {
    let digits = vec![('0', '9')];
    let word = vec![('0', '9'), ('A', 'Z'), ('_', '_'), ('a', 'z')];
    let space = vec![('\t', '\r'), (' ', ' ')];
    match c {
        'd' => Some((digits, false)),
        'D' => Some((digits, true)),
        'w' => Some((word, false)),
        'W' => Some((word, true)),
        's' => Some((space, false)),
        'S' => Some((space, true)),
        _ => None,
    }
}

fn plain_escape(c: char) -> char {
    match c {
        'n' => '\n',
        't' => '\t',
        'r' => '\r',
        other => other,
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn err<T>(&self, m: &str) -> Result<T, OracleError> {
        Err(OracleError(format!("{m} at {}", self.pos)))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn alt(&mut self) -> Result<Node, OracleError> {
        let mut branches = vec![self.seq()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            branches.push(self.seq()?);
        }
        Ok(if branches.len() == 1 { branches.pop().unwrap() } else { Node::Alt(branches) })
    }

    fn seq(&mut self) -> Result<Node, OracleError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let mut atom = self.atom()?;
            loop {
                let (min, max) = match self.peek() {
                    Some('*') => (0, None),
                    Some('+') => (1, None),
                    Some('?') => (0, Some(1)),
                    Some('{') => {
                        self.pos += 1;
                        let (min, max) = self.counts()?;
                        atom = Node::Repeat { node: Box::new(atom), min, max };
                        continue;
                    }
                    _ => break,
                };
                self.pos += 1;
                atom = Node::Repeat { node: Box::new(atom), min, max };
            }
            items.push(atom);
        }
        Ok(Node::Seq(items))
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().ok()
    }

    fn counts(&mut self) -> Result<(u32, Option<u32>), OracleError> {
        let Some(min) = self.number() else { return self.err("expected count") };
        let max = match self.peek() {
            Some(',') => {
                self.pos += 1;
                self.number()
            }
            _ => Some(min),
        };
        if self.peek() != Some('}') {
            return self.err("expected `}`");
        }
        self.pos += 1;
        Ok((min, max))
    }

    fn atom(&mut self) -> Result<Node, OracleError> {
        let c = self.peek().unwrap();
        self.pos += 1;
        match c {
            '(' => {
                if self.chars[self.pos..].starts_with(&['?', ':']) {
                    self.pos += 2;
                }
                let inner = self.alt()?;
                if self.peek() != Some(')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            '[' => self.class(),
            '.' => Ok(Node::Any),
            '\\' => {
                let Some(e) = self.peek() else { return self.err("dangling escape") };
                self.pos += 1;
                Ok(match class_escape(e) {
                    Some((ranges, negated)) => Node::Set { ranges, negated },
                    None => {
                        let c = plain_escape(e);
                        Node::Set { ranges: vec![(c, c)], negated: false }
                    }
                })
            }
            '*' | '+' | '?' | '{' => self.err("nothing to repeat"),
            c => Ok(Node::Set { ranges: vec![(c, c)], negated: false }),
        }
    }

    fn class(&mut self) -> Result<Node, OracleError> {
        let negated = self.peek() == Some('^');
        if negated {
            self.pos += 1;
        }
        let mut ranges = Vec::new();
        let mut first = true;
        loop {
            let Some(c) = self.peek() else { return self.err("unterminated class") };
            self.pos += 1;
            if c == ']' && !first {
                break;
            }
            first = false;
            let lo = if c == '\\' {
                let Some(e) = self.peek() else { return self.err("dangling escape") };
                self.pos += 1;
                if let Some((rs, neg)) = class_escape(e) {
                    if neg {
                        return self.err("negated escape inside a class");
                    }
                    ranges.extend(rs);
                    continue;
                }
                plain_escape(e)
            } else {
                c
            };
            if self.peek() == Some('-') && self.chars.get(self.pos + 1).is_some_and(|&n| n != ']') {
                self.pos += 1;
                let mut hi = self.peek().unwrap();
                self.pos += 1;
                if hi == '\\' {
                    let Some(e) = self.peek() else { return self.err("dangling escape") };
                    self.pos += 1;
                    hi = plain_escape(e);
                }
                ranges.push((lo, hi));
            } else {
                ranges.push((lo, lo));
            }
        }
        Ok(Node::Set { ranges, negated })
    }
}

impl Backtracker {
    pub fn new(pattern: &str) -> Result<Self, OracleError> {
        let mut chars: Vec<char> = pattern.chars().collect();
        if chars.first() == Some(&'^') {
            chars.remove(0);
        }
        if chars.last() == Some(&'$') && !(chars.len() >= 2 && chars[chars.len() - 2] == '\\') {
            chars.pop();
        }
        let mut p = Parser { chars, pos: 0 };
        let root = p.alt()?;
        if p.pos != p.chars.len() {
            return p.err("trailing input");
        }
        Ok(Backtracker { root })
    }

    pub fn is_match(&self, text: &str) -> bool {
        let chars: Vec<char> = text.chars().collect();
        step(&self.root, &chars, 0, &mut |end| end == chars.len())
    }
}

/// Tries `node` at `at`, calling `k` with each end position until it accepts.
fn step(node: &Node, s: &[char], at: usize, k: &mut dyn FnMut(usize) -> bool) -> bool {
    match node {
        Node::Set { ranges, negated } => match s.get(at) {
            Some(&c) if ranges.iter().any(|&(lo, hi)| lo <= c && c <= hi) != *negated => k(at + 1),
            _ => false,
        },
        Node::Any => at < s.len() && k(at + 1),
        Node::Seq(items) => seq(items, s, at, k),
        Node::Alt(branches) => branches.iter().any(|b| step(b, s, at, k)),
        Node::Repeat { node, min, max } => repeat(node, *min, *max, 0, s, at, k),
    }
}

fn seq(items: &[Node], s: &[char], at: usize, k: &mut dyn FnMut(usize) -> bool) -> bool {
    match items.split_first() {
        None => k(at),
        Some((head, rest)) => step(head, s, at, &mut |next| seq(rest, s, next, k)),
    }
}

fn repeat(
    node: &Node,
    min: u32,
    max: Option<u32>,
    done: u32,
    s: &[char],
    at: usize,
    k: &mut dyn FnMut(usize) -> bool,
) -> bool {
    if max.is_some_and(|m| done >= m) {
        return k(at);
    }
    if done < min {
        return step(node, s, at, &mut |next| repeat(node, min, max, done + 1, s, next, k));
    }
    // Greedy: one more iteration if it makes progress, otherwise stop here.
    step(node, s, at, &mut |next| next > at && repeat(node, min, max, done + 1, s, next, k)) || k(at)
}

/// Whole-string match through the `regex` crate, for cross-checking the
/// backtracker itself.
pub fn regex_crate_matches(pattern: &str, text: &str) -> bool {
    let body = pattern.strip_prefix('^').unwrap_or(pattern);
    let body = if body.ends_with('$') && !body.ends_with("\\$") { &body[..body.len() - 1] } else { body };
    let re = regex::Regex::new(&format!("^(?:{body})$")).expect("pattern accepted by the regex crate");
    re.is_match(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        let m = |p: &str, t: &str| Backtracker::new(p).unwrap().is_match(t);
        assert!(m("[0-9a-z-]{1,64}", "-"));
        assert!(!m("[0-9a-z]([0-9a-z-]{0,62}[0-9a-z])?", "-"));
        assert!(m("[0-9a-z]([0-9a-z-]{0,62}[0-9a-z])?", "a-b"));
        assert!(!m("[0-9a-z]([0-9a-z-]{0,62}[0-9a-z])?", "ab-"));
        assert!(m("(a*)*b", "aab"));
        assert!(m("^a|b$", "b"));
        assert!(!m("a{2,3}", "aaaa"));
        assert!(m("a{2,}", "aaaa"));
        assert!(m("[^a]\\d", "b7"));
        assert!(m("", ""));
    }

    #[test]
    fn agrees_with_regex_crate() {
        for p in ["[0-9a-z-]{1,64}", "(ab|a)(c|bcd)", "a?b+c*", "[^ab]{0,2}x"] {
            let b = Backtracker::new(p).unwrap();
            for t in ["", "a", "-", "abcd", "abc", "bcc", "cx", "zzx", "bbb"] {
                assert_eq!(b.is_match(t), regex_crate_matches(p, t), "{p} on {t:?}");
            }
        }
    }
}
