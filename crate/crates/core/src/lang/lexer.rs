use std::fmt;

use super::ast::{FileId, Pos, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Dot,
    At,
    Arrow,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Bang,
    AndAnd,
    OrOr,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "`{name}`"),
            Tok::Int(digits) => return write!(f, "integer {digits}"),
            Tok::Str(_) => "string literal",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Dot => "`.`",
            Tok::At => "`@`",
            Tok::Arrow => "`->`",
            Tok::Assign => "`=`",
            Tok::EqEq => "`==`",
            Tok::NotEq => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Percent => "`%`",
            Tok::Bang => "`!`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Eof => "end of file",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    text: &'a str,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn pos(&mut self) -> Pos {
        let offset = self.chars.peek().map(|(i, _)| *i).unwrap_or(self.text.len());
        Pos { line: self.line, col: self.col, offset }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|(_, c)| *c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.bump();
            true
        } else {
            false
        }
    }
}

pub fn tokenize(text: &str, file: FileId) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { chars: text.char_indices().peekable(), text, line: 1, col: 1 };
    let mut tokens = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '/' && text[cur.pos().offset..].starts_with("//") {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let start = cur.pos();
        let Some(c) = cur.bump() else {
            tokens.push(Token { tok: Tok::Eof, span: Span { file, start, end: start } });
            return Ok(tokens);
        };
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            '@' => Tok::At,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '%' => Tok::Percent,
            '-' if cur.eat('>') => Tok::Arrow,
            '-' => Tok::Minus,
            '=' if cur.eat('=') => Tok::EqEq,
            '=' => Tok::Assign,
            '!' if cur.eat('=') => Tok::NotEq,
            '!' => Tok::Bang,
            '<' if cur.eat('=') => Tok::Le,
            '<' => Tok::Lt,
            '>' if cur.eat('=') => Tok::Ge,
            '>' => Tok::Gt,
            '&' if cur.eat('&') => Tok::AndAnd,
            '|' if cur.eat('|') => Tok::OrOr,
            '"' => Tok::Str(lex_string(&mut cur, start)?),
            c if c.is_ascii_digit() => {
                let mut digits = String::from(c);
                while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                    digits.push(d);
                    cur.bump();
                }
                if cur.peek().is_some_and(|c| c.is_alphabetic() || c == '_') {
                    return Err(LexError { pos: cur.pos(), message: "malformed integer literal".into() });
                }
                Tok::Int(digits)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut ident = String::from(c);
                while let Some(d) = cur.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
                    ident.push(d);
                    cur.bump();
                }
                Tok::Ident(ident)
            }
            other => {
                return Err(LexError { pos: start, message: format!("unexpected character `{other}`") });
            }
        };
        let end = cur.pos();
        tokens.push(Token { tok, span: Span { file, start, end } });
    }
}

fn lex_string(cur: &mut Cursor<'_>, start: Pos) -> Result<String, LexError> {
    let mut value = String::new();
    loop {
        match cur.bump() {
            None | Some('\n') => {
                return Err(LexError { pos: start, message: "unterminated string literal".into() });
            }
            Some('"') => return Ok(value),
            Some('\\') => match cur.bump() {
                Some('"') => value.push('"'),
                Some('\\') => value.push('\\'),
                Some('n') => value.push('\n'),
                Some('t') => value.push('\t'),
                Some('r') => value.push('\r'),
                // Unknown escapes are kept verbatim so regex escapes such as
                // `\.` survive without doubling.
                Some(other) => {
                    value.push('\\');
                    value.push(other);
                }
                None => return Err(LexError { pos: start, message: "unterminated string literal".into() }),
            },
            Some(c) => value.push(c),
        }
    }
}

/// Escapes a string so that [`tokenize`] reads back the same value.
pub fn quote(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<Tok> {
        tokenize(text, FileId(0)).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_comments() {
        assert_eq!(
            toks("a->b // c\n<= != && ||"),
            vec![
                Tok::Ident("a".into()),
                Tok::Arrow,
                Tok::Ident("b".into()),
                Tok::Le,
                Tok::NotEq,
                Tok::AndAnd,
                Tok::OrOr,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn string_escapes_round_trip() {
        for s in ["plain", "a\"b", "back\\slash", "[0-9a-z\\-]", "line\nbreak"] {
            assert_eq!(toks(&quote(s)), vec![Tok::Str(s.into()), Tok::Eof]);
        }
        assert_eq!(toks(r#""a\.b""#), vec![Tok::Str("a\\.b".into()), Tok::Eof]);
    }

    #[test]
    fn spans_track_lines() {
        let tokens = tokenize("x\n  yy", FileId(3)).unwrap();
        assert_eq!(tokens[1].span.start, Pos { line: 2, col: 3, offset: 4 });
        assert_eq!(tokens[1].span.end, Pos { line: 2, col: 5, offset: 6 });
        assert_eq!(tokens[1].span.file, FileId(3));
    }

    #[test]
    fn errors() {
        assert!(tokenize("\"open", FileId(0)).is_err());
        assert!(tokenize("a # b", FileId(0)).is_err());
        assert!(tokenize("12ab", FileId(0)).is_err());
    }
}
