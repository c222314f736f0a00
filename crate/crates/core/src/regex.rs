//! Regular-expression subset used by `matches(..)`: literals, escapes, `.`,
//! bracket classes with ranges and `^` negation, groups, `|`, `*`, `+`, `?`
//! and `{m}`, `{m,}`, `{m,n}`. Matching is always full-match.

use std::fmt;

use thiserror::Error;

pub const MAX_SCALAR: u32 = 0x10FFFF;
/// Upper limit on `{m,n}` bounds.
pub const MAX_REPEAT: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegexError {
    #[error("regex syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unsupported regex feature at {pos}: {feature}")]
    Unsupported { pos: usize, feature: String },
}

/// Sorted, disjoint, non-adjacent scalar intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CharClass {
    pub ranges: Vec<(char, char)>,
    pub negated: bool,
}

impl CharClass {
    pub fn new(ranges: Vec<(char, char)>, negated: bool) -> Self {
        CharClass { ranges: normalize(ranges), negated }
    }

    pub fn contains(&self, c: char) -> bool {
        let inside = self.ranges.binary_search_by(|&(lo, hi)| {
            if hi < c {
                std::cmp::Ordering::Less
            } else if lo > c {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        inside.is_ok() != self.negated
    }

    /// Matched scalar intervals as `u32` ranges, with negation applied.
    pub fn scalar_ranges(&self) -> Vec<(u32, u32)> {
        let ranges: Vec<(u32, u32)> = self.ranges.iter().map(|&(lo, hi)| (lo as u32, hi as u32)).collect();
        if !self.negated {
            return ranges;
        }
        let mut out = Vec::new();
        let mut next = 0u32;
        for (lo, hi) in ranges {
            if lo > next {
                out.push((next, lo - 1));
            }
            next = hi + 1;
        }
        if next <= MAX_SCALAR {
            out.push((next, MAX_SCALAR));
        }
        out
    }
}

fn normalize(mut ranges: Vec<(char, char)>) -> Vec<(char, char)> {
    ranges.sort();
    let mut out: Vec<(char, char)> = Vec::with_capacity(ranges.len());
    for (lo, hi) in ranges {
        if let Some(last) = out.last_mut() {
            if (lo as u32) <= (last.1 as u32).saturating_add(1) {
                if hi > last.1 {
                    last.1 = hi;
                }
                continue;
            }
        }
        out.push((lo, hi));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RegexAst {
    Literal(char),
    AnyChar,
    Class(CharClass),
    Concat(Vec<RegexAst>),
    Alt(Vec<RegexAst>),
    Star(Box<RegexAst>),
    Plus(Box<RegexAst>),
    Opt(Box<RegexAst>),
    Repeat { node: Box<RegexAst>, min: u32, max: Option<u32> },
}

impl RegexAst {
    /// Every scalar interval mentioned by literals and classes.
    pub fn intervals(&self, out: &mut Vec<(u32, u32)>) {
        match self {
            RegexAst::Literal(c) => out.push((*c as u32, *c as u32)),
            RegexAst::AnyChar => out.push((0, MAX_SCALAR)),
            RegexAst::Class(class) => out.extend(class.scalar_ranges()),
            RegexAst::Concat(items) | RegexAst::Alt(items) => items.iter().for_each(|i| i.intervals(out)),
            RegexAst::Star(n) | RegexAst::Plus(n) | RegexAst::Opt(n) => n.intervals(out),
            RegexAst::Repeat { node, .. } => node.intervals(out),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            RegexAst::Literal(_) | RegexAst::AnyChar | RegexAst::Class(_) => 1,
            RegexAst::Concat(items) | RegexAst::Alt(items) => 1 + items.iter().map(Self::depth).max().unwrap_or(0),
            RegexAst::Star(n) | RegexAst::Plus(n) | RegexAst::Opt(n) => 1 + n.depth(),
            RegexAst::Repeat { node, .. } => 1 + node.depth(),
        }
    }
}

fn write_char(f: &mut fmt::Formatter<'_>, c: char, in_class: bool) -> fmt::Result {
    let special = if in_class { "\\]-^[" } else { "\\.[]{}()|*+?^$" };
    if special.contains(c) {
        write!(f, "\\{c}")
    } else if c == '\n' {
        f.write_str("\\n")
    } else if c == '\t' {
        f.write_str("\\t")
    } else if c == '\r' {
        f.write_str("\\r")
    } else {
        write!(f, "{c}")
    }
}

/// Prints a pattern in the supported syntax that parses back to an
/// equivalent tree.
impl fmt::Display for RegexAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegexAst::Literal(c) => write_char(f, *c, false),
            RegexAst::AnyChar => f.write_str("."),
            RegexAst::Class(class) => {
                f.write_str("[")?;
                if class.negated {
                    f.write_str("^")?;
                }
                for &(lo, hi) in &class.ranges {
                    write_char(f, lo, true)?;
                    if hi != lo {
                        f.write_str("-")?;
                        write_char(f, hi, true)?;
                    }
                }
                f.write_str("]")
            }
            RegexAst::Concat(items) => {
                for item in items {
                    if matches!(item, RegexAst::Alt(_) | RegexAst::Concat(_)) {
                        write!(f, "({item})")?;
                    } else {
                        write!(f, "{item}")?;
                    }
                }
                Ok(())
            }
            RegexAst::Alt(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    if matches!(item, RegexAst::Alt(_)) {
                        write!(f, "({item})")?;
                    } else {
                        write!(f, "{item}")?;
                    }
                }
                Ok(())
            }
            RegexAst::Star(n) => write_quantified(f, n, "*"),
            RegexAst::Plus(n) => write_quantified(f, n, "+"),
            RegexAst::Opt(n) => write_quantified(f, n, "?"),
            RegexAst::Repeat { node, min, max } => {
                let q = match max {
                    Some(max) if max == min => format!("{{{min}}}"),
                    Some(max) => format!("{{{min},{max}}}"),
                    None => format!("{{{min},}}"),
                };
                write_quantified(f, node, &q)
            }
        }
    }
}

fn write_quantified(f: &mut fmt::Formatter<'_>, node: &RegexAst, q: &str) -> fmt::Result {
    match node {
        RegexAst::Literal(_) | RegexAst::AnyChar | RegexAst::Class(_) => write!(f, "{node}{q}"),
        _ => write!(f, "({node}){q}"),
    }
}

pub fn parse(pattern: &str) -> Result<RegexAst, RegexError> {
    let chars: Vec<char> = pattern.chars().collect();
    let mut parser = RegexParser { chars, pos: 0 };
    if parser.peek() == Some('^') {
        parser.pos += 1;
    }
    let ast = parser.alt()?;
    if parser.pos < parser.chars.len() {
        return Err(match parser.chars[parser.pos] {
            ')' => parser.syntax("unbalanced `)`"),
            _ => parser.syntax("unexpected character"),
        });
    }
    Ok(ast)
}

struct RegexParser {
    chars: Vec<char>,
    pos: usize,
}

impl RegexParser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn syntax(&self, message: &str) -> RegexError {
        RegexError::Syntax { pos: self.pos, message: message.into() }
    }

    fn unsupported(&self, feature: &str) -> RegexError {
        RegexError::Unsupported { pos: self.pos, feature: feature.into() }
    }

    fn alt(&mut self) -> Result<RegexAst, RegexError> {
        let mut branches = vec![self.concat()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            branches.push(self.concat()?);
        }
        Ok(if branches.len() == 1 { branches.pop().expect("one branch") } else { RegexAst::Alt(branches) })
    }

    fn concat(&mut self) -> Result<RegexAst, RegexError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            match c {
                '|' | ')' => break,
                '$' if self.pos + 1 == self.chars.len() => {
                    self.pos += 1;
                    break;
                }
                _ => items.push(self.quantified()?),
            }
        }
        Ok(if items.len() == 1 { items.pop().expect("one item") } else { RegexAst::Concat(items) })
    }

    fn quantified(&mut self) -> Result<RegexAst, RegexError> {
        let mut node = self.atom()?;
        loop {
            node = match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    RegexAst::Star(Box::new(node))
                }
                Some('+') => {
                    self.pos += 1;
                    RegexAst::Plus(Box::new(node))
                }
                Some('?') => {
                    self.pos += 1;
                    RegexAst::Opt(Box::new(node))
                }
                Some('{') => {
                    let (min, max) = self.bounds()?;
                    RegexAst::Repeat { node: Box::new(node), min, max }
                }
                _ => return Ok(node),
            };
        }
    }

    fn number(&mut self) -> Result<u32, RegexError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected repetition count"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        match digits.parse::<u32>() {
            Ok(n) if n <= MAX_REPEAT => Ok(n),
            _ => {
                self.pos = start;
                Err(self.unsupported("repetition bound above 1000"))
            }
        }
    }

    fn bounds(&mut self) -> Result<(u32, Option<u32>), RegexError> {
        self.pos += 1;
        let min = self.number()?;
        let max = if self.peek() == Some(',') {
            self.pos += 1;
            if self.peek() == Some('}') {
                None
            } else {
                Some(self.number()?)
            }
        } else {
            Some(min)
        };
        if self.peek() != Some('}') {
            return Err(self.syntax("expected `}`"));
        }
        if let Some(max) = max {
            if max < min {
                return Err(self.syntax("repetition maximum below minimum"));
            }
        }
        self.pos += 1;
        Ok((min, max))
    }

    fn atom(&mut self) -> Result<RegexAst, RegexError> {
        let c = self.peek().ok_or_else(|| self.syntax("unexpected end of pattern"))?;
        match c {
            '(' => {
                self.pos += 1;
                if self.peek() == Some('?') {
                    let rest: String = self.chars[self.pos..].iter().take(3).collect();
                    if rest.starts_with("?:") {
                        self.pos += 2;
                    } else if rest.starts_with("?=") || rest.starts_with("?!") || rest.starts_with("?<") {
                        return Err(self.unsupported("lookaround"));
                    } else {
                        return Err(self.unsupported("group flags"));
                    }
                }
                let inner = self.alt()?;
                if self.peek() != Some(')') {
                    return Err(self.syntax("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            '[' => self.class(),
            '.' => {
                self.pos += 1;
                Ok(RegexAst::AnyChar)
            }
            '\\' => match self.escape()? {
                Escaped::Char(c) => Ok(RegexAst::Literal(c)),
                Escaped::Class(class) => Ok(RegexAst::Class(class)),
            },
            '*' | '+' | '?' | '{' => Err(self.syntax("nothing to repeat")),
            '^' | '$' => Err(self.unsupported("anchor inside pattern")),
            c => {
                self.pos += 1;
                Ok(RegexAst::Literal(c))
            }
        }
    }

    fn escape(&mut self) -> Result<Escaped, RegexError> {
        self.pos += 1;
        let c = self.peek().ok_or_else(|| self.syntax("dangling escape"))?;
        let escaped = match c {
            'n' => Escaped::Char('\n'),
            't' => Escaped::Char('\t'),
            'r' => Escaped::Char('\r'),
            'd' | 'D' => Escaped::Class(CharClass::new(vec![('0', '9')], c == 'D')),
            'w' | 'W' => Escaped::Class(CharClass::new(
                vec![('0', '9'), ('A', 'Z'), ('_', '_'), ('a', 'z')],
                c == 'W',
            )),
            's' | 'S' => Escaped::Class(CharClass::new(
                vec![('\t', '\t'), ('\n', '\n'), ('\u{b}', '\u{b}'), ('\u{c}', '\u{c}'), ('\r', '\r'), (' ', ' ')],
                c == 'S',
            )),
            '0'..='9' => return Err(self.unsupported("backreference")),
            'b' | 'B' | 'A' | 'z' | 'Z' => return Err(self.unsupported("assertion escape")),
            c if c.is_ascii_alphanumeric() => return Err(self.unsupported("escape sequence")),
            c => Escaped::Char(c),
        };
        self.pos += 1;
        Ok(escaped)
    }

    fn class(&mut self) -> Result<RegexAst, RegexError> {
        let open = self.pos;
        self.pos += 1;
        let negated = self.peek() == Some('^');
        if negated {
            self.pos += 1;
        }
        let mut ranges = Vec::new();
        let mut first = true;
        loop {
            let c = self.peek().ok_or(RegexError::Syntax { pos: open, message: "unterminated class".into() })?;
            if c == ']' && !first {
                self.pos += 1;
                break;
            }
            first = false;
            let lo = if c == '\\' {
                match self.escape()? {
                    Escaped::Char(c) => c,
                    Escaped::Class(class) => {
                        ranges.extend(
                            class
                                .scalar_ranges()
                                .into_iter()
                                .filter_map(|(lo, hi)| Some((char_at_or_after(lo)?, char_at_or_before(hi)?))),
                        );
                        continue;
                    }
                }
            } else {
                self.pos += 1;
                c
            };
            let is_range = self.peek() == Some('-') && self.chars.get(self.pos + 1).is_some_and(|&n| n != ']');
            if is_range {
                self.pos += 1;
                let hi = match self.peek() {
                    Some('\\') => match self.escape()? {
                        Escaped::Char(c) => c,
                        Escaped::Class(_) => return Err(self.syntax("class escape cannot end a range")),
                    },
                    Some(c) => {
                        self.pos += 1;
                        c
                    }
                    None => return Err(self.syntax("unterminated class")),
                };
                if hi < lo {
                    return Err(RegexError::Syntax { pos: self.pos - 1, message: "invalid range".into() });
                }
                ranges.push((lo, hi));
            } else {
                ranges.push((lo, lo));
            }
        }
        Ok(RegexAst::Class(CharClass::new(ranges, negated)))
    }
}

enum Escaped {
    Char(char),
    Class(CharClass),
}

/// Smallest scalar value `>= v`, skipping the surrogate gap.
pub fn char_at_or_after(v: u32) -> Option<char> {
    if (0xD800..=0xDFFF).contains(&v) {
        char::from_u32(0xE000)
    } else {
        char::from_u32(v)
    }
}

fn char_at_or_before(v: u32) -> Option<char> {
    if (0xD800..=0xDFFF).contains(&v) {
        char::from_u32(0xD7FF)
    } else {
        char::from_u32(v)
    }
}

/// Full-match test by position-set simulation over the tree. Runs in
/// polynomial time and shares no code with the automata pipeline.
pub fn is_match(ast: &RegexAst, input: &str) -> bool {
    let chars: Vec<char> = input.chars().collect();
    let mut start = vec![false; chars.len() + 1];
    start[0] = true;
    let end = advance(ast, &chars, &start);
    end[chars.len()]
}

fn advance(ast: &RegexAst, chars: &[char], from: &[bool]) -> Vec<bool> {
    let n = chars.len();
    let single = |pred: &dyn Fn(char) -> bool| {
        let mut out = vec![false; n + 1];
        for i in 0..n {
            if from[i] && pred(chars[i]) {
                out[i + 1] = true;
            }
        }
        out
    };
    match ast {
        RegexAst::Literal(c) => single(&|x| x == *c),
        RegexAst::AnyChar => single(&|_| true),
        RegexAst::Class(class) => single(&|x| class.contains(x)),
        RegexAst::Concat(items) => {
            let mut cur = from.to_vec();
            for item in items {
                cur = advance(item, chars, &cur);
            }
            cur
        }
        RegexAst::Alt(items) => {
            let mut out = vec![false; n + 1];
            for item in items {
                union(&mut out, &advance(item, chars, from));
            }
            out
        }
        RegexAst::Star(node) => closure(node, chars, from.to_vec(), None),
        RegexAst::Plus(node) => {
            let once = advance(node, chars, from);
            closure(node, chars, once, None)
        }
        RegexAst::Opt(node) => {
            let mut out = from.to_vec();
            union(&mut out, &advance(node, chars, from));
            out
        }
        RegexAst::Repeat { node, min, max } => {
            let mut cur = from.to_vec();
            for _ in 0..*min {
                cur = advance(node, chars, &cur);
            }
            match max {
                None => closure(node, chars, cur, None),
                Some(max) => closure(node, chars, cur, Some(max - min)),
            }
        }
    }
}

fn union(into: &mut [bool], other: &[bool]) {
    for (a, b) in into.iter_mut().zip(other) {
        *a |= *b;
    }
}

/// Positions reachable by zero or more (at most `limit`) further iterations.
fn closure(node: &RegexAst, chars: &[char], mut acc: Vec<bool>, limit: Option<u32>) -> Vec<bool> {
    let mut frontier = acc.clone();
    let mut rounds = 0u32;
    while limit.is_none_or(|l| rounds < l) {
        let next = advance(node, chars, &frontier);
        let mut fresh = vec![false; acc.len()];
        let mut changed = false;
        for i in 0..acc.len() {
            if next[i] && !acc[i] {
                acc[i] = true;
                changed = true;
            }
            fresh[i] = next[i];
        }
        // With a bounded count, positions reached again still count as a new
        // iteration, so keep the full `next` set as frontier.
        if limit.is_none() {
            if !changed {
                break;
            }
        } else if !next.iter().any(|b| *b) {
            break;
        }
        frontier = fresh;
        rounds += 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_name_pattern_shape() {
        let ast = parse("[0-9a-z-]{1,64}").unwrap();
        assert_eq!(
            ast,
            RegexAst::Repeat {
                node: Box::new(RegexAst::Class(CharClass {
                    ranges: vec![('-', '-'), ('0', '9'), ('a', 'z')],
                    negated: false
                })),
                min: 1,
                max: Some(64)
            }
        );
    }

    #[test]
    fn alternation_and_errors() {
        assert_eq!(parse("a|b").unwrap(), RegexAst::Alt(vec![RegexAst::Literal('a'), RegexAst::Literal('b')]));
        assert!(matches!(parse("a("), Err(RegexError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("(a)\\1"), Err(RegexError::Unsupported { .. })));
        assert!(matches!(parse("(?=a)"), Err(RegexError::Unsupported { .. })));
        assert!(matches!(parse("*a"), Err(RegexError::Syntax { pos: 0, .. })));
        assert!(matches!(parse("a{3,2}"), Err(RegexError::Syntax { .. })));
        assert!(matches!(parse("[z-a]"), Err(RegexError::Syntax { .. })));
        assert!(matches!(parse("[ab"), Err(RegexError::Syntax { pos: 0, .. })));
    }

    #[test]
    fn escapes_in_classes() {
        let ast = parse(r"[\-\]\\\.]").unwrap();
        let RegexAst::Class(class) = ast else { panic!() };
        for c in ['-', ']', '\\', '.'] {
            assert!(class.contains(c), "{c}");
        }
        assert!(!class.contains('a'));
        let RegexAst::Class(neg) = parse("[^a-c]").unwrap() else { panic!() };
        assert!(neg.contains('d') && !neg.contains('b'));
    }

    #[test]
    fn matching() {
        let re = parse("[0-9a-z-]{1,64}").unwrap();
        assert!(is_match(&re, "-"));
        assert!(!is_match(&re, ""));
        assert!(is_match(&re, &"a".repeat(64)));
        assert!(!is_match(&re, &"a".repeat(65)));
        let fixed = parse("[0-9a-z]([0-9a-z-]{0,62}[0-9a-z])?").unwrap();
        assert!(!is_match(&fixed, "-"));
        assert!(is_match(&fixed, "a-b"));
        assert!(!is_match(&fixed, "a-"));
        let star = parse("(a|)*b").unwrap();
        assert!(is_match(&star, "aab") && is_match(&star, "b") && !is_match(&star, "ba"));
        assert!(is_match(&parse("^ab$").unwrap(), "ab"));
        assert!(is_match(&parse("(ab){2,}").unwrap(), "ababab"));
        assert!(!is_match(&parse("(ab){2,}").unwrap(), "ab"));
        assert!(is_match(&parse("(a?){3}").unwrap(), "aa"));
    }

    #[test]
    fn display_reparses() {
        for p in ["[0-9a-z-]{1,64}", "a|b(c|d)*", "[^\\]x]+\\.", "(ab)?c{2,}", "x{0,3}"] {
            let ast = parse(p).unwrap();
            assert_eq!(parse(&ast.to_string()).unwrap(), ast, "{p}");
        }
    }
}
