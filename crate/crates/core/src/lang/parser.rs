//! Recursive-descent parser for MiniLang.

use num_bigint::BigInt;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};

pub const KEYWORDS: &[&str] = &[
    "namespace", "class", "fn", "let", "if", "else", "while", "return", "true", "false", "len", "matches", "int",
    "bool", "string",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

type PResult<T> = Result<T, ParseError>;

/// Parses one file. On the first error the remainder of the file is skipped;
/// namespaces completed before the error are kept.
pub fn parse_file(text: &str, file: FileId) -> (SourceFile, Option<ParseError>) {
    let whole = Span {
        file,
        start: Pos { line: 1, col: 1, offset: 0 },
        end: end_pos(text),
    };
    let tokens = match tokenize(text, file) {
        Ok(tokens) => tokens,
        Err(err) => {
            return (
                SourceFile { namespaces: Vec::new(), span: whole },
                Some(ParseError { pos: err.pos, message: err.message }),
            )
        }
    };
    let mut parser = Parser { tokens, pos: 0 };
    let mut namespaces = Vec::new();
    let mut error = None;
    while !parser.at(&Tok::Eof) {
        match parser.namespace() {
            Ok(ns) => namespaces.push(ns),
            Err(err) => {
                error = Some(err);
                break;
            }
        }
    }
    (SourceFile { namespaces, span: whole }, error)
}

fn end_pos(text: &str) -> Pos {
    let mut line = 1;
    let mut col = 1;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    Pos { line, col, offset: text.len() }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let idx = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(name) if name == kw)
    }

    fn advance(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError {
            pos: self.span().start,
            message: format!("expected {expected}, found {}", self.peek()),
        })
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.at(&tok) {
            Ok(self.advance().span)
        } else {
            self.error(&tok.to_string())
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.at_keyword(kw) {
            Ok(self.advance().span)
        } else {
            self.error(kw)
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let name = name.clone();
                Ok((name, self.advance().span))
            }
            _ => self.error("identifier"),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Str(value) => {
                let value = value.clone();
                self.advance();
                Ok(value)
            }
            _ => self.error("string literal"),
        }
    }

    fn namespace(&mut self) -> PResult<Namespace> {
        let start = self.keyword("namespace")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut classes = Vec::new();
        while !self.at(&Tok::RBrace) {
            classes.push(self.class()?);
        }
        let end = self.expect(Tok::RBrace)?;
        Ok(Namespace { name, classes, span: start.to(end) })
    }

    fn class(&mut self) -> PResult<Class> {
        let start = self.keyword("class")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut methods = Vec::new();
        while !self.at(&Tok::RBrace) {
            methods.push(self.method()?);
        }
        let end = self.expect(Tok::RBrace)?;
        Ok(Class { name, methods, span: start.to(end) })
    }

    fn method(&mut self) -> PResult<Method> {
        let start = self.span();
        let mut attrs = Vec::new();
        while self.at(&Tok::At) {
            attrs.push(self.attribute()?);
        }
        self.keyword("fn")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                let (pname, pspan) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                params.push(Param { name: pname, ty, span: pspan.to(self.prev_span()) });
                if self.at(&Tok::Comma) {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let ret = if self.at(&Tok::Arrow) {
            self.advance();
            Some(self.ty()?)
        } else {
            None
        };
        let body = self.block()?;
        let span = start.to(body.span);
        Ok(Method { attrs, name, params, ret, body, span })
    }

    fn attribute(&mut self) -> PResult<Attribute> {
        let start = self.expect(Tok::At)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut args = vec![self.string()?];
        while self.at(&Tok::Comma) {
            self.advance();
            args.push(self.string()?);
        }
        let end = self.expect(Tok::RParen)?;
        Ok(Attribute { name, args, span: start.to(end) })
    }

    fn ty(&mut self) -> PResult<Type> {
        let ty = match self.peek() {
            Tok::Ident(name) if name == "int" => Type::Int,
            Tok::Ident(name) if name == "bool" => Type::Bool,
            Tok::Ident(name) if name == "string" => Type::String,
            _ => return self.error("type"),
        };
        self.advance();
        Ok(ty)
    }

    fn block(&mut self) -> PResult<Block> {
        let start = self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.at(&Tok::RBrace) {
            stmts.push(self.stmt()?);
        }
        let end = self.expect(Tok::RBrace)?;
        Ok(Block { stmts, span: start.to(end) })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let kind = if self.at_keyword("let") {
            self.advance();
            let (name, _) = self.ident()?;
            self.expect(Tok::Assign)?;
            let value = self.expr()?;
            self.expect(Tok::Semi)?;
            StmtKind::Let { name, value }
        } else if self.at_keyword("if") {
            self.advance();
            self.expect(Tok::LParen)?;
            let cond = self.expr()?;
            self.expect(Tok::RParen)?;
            let then_block = self.block()?;
            let else_block = if self.at_keyword("else") {
                self.advance();
                Some(self.block()?)
            } else {
                None
            };
            StmtKind::If { cond, then_block, else_block }
        } else if self.at_keyword("while") {
            self.advance();
            self.expect(Tok::LParen)?;
            let cond = self.expr()?;
            self.expect(Tok::RParen)?;
            let body = self.block()?;
            StmtKind::While { cond, body }
        } else if self.at_keyword("return") {
            self.advance();
            let value = if self.at(&Tok::Semi) { None } else { Some(self.expr()?) };
            self.expect(Tok::Semi)?;
            StmtKind::Return(value)
        } else if matches!(self.peek_at(1), Tok::Dot) {
            let call = self.call()?;
            self.expect(Tok::Semi)?;
            StmtKind::Call(call)
        } else if matches!(self.peek_at(1), Tok::Assign) {
            let (name, _) = self.ident()?;
            self.advance();
            let value = self.expr()?;
            self.expect(Tok::Semi)?;
            StmtKind::Assign { name, value }
        } else {
            return self.error("statement");
        };
        Ok(Stmt { kind, span: start.to(self.prev_span()) })
    }

    fn call(&mut self) -> PResult<Call> {
        let (namespace, start) = self.ident()?;
        self.expect(Tok::Dot)?;
        let (class, _) = self.ident()?;
        self.expect(Tok::Dot)?;
        let (method, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                args.push(self.expr()?);
                if self.at(&Tok::Comma) {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        let end = self.expect(Tok::RParen)?;
        Ok(Call { callee: QualifiedName { namespace, class, method }, args, span: start.to(end) })
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Rem,
            _ => return None,
        })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop().filter(|op| op.precedence() >= min_prec) {
            self.advance();
            let rhs = self.binary(op.precedence() + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek() {
            Tok::Bang => UnOp::Not,
            Tok::Minus => UnOp::Neg,
            _ => return self.primary(),
        };
        let start = self.advance().span;
        let operand = self.unary()?;
        let span = start.to(operand.span);
        Ok(Expr { kind: ExprKind::Unary(op, Box::new(operand)), span })
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(digits) => {
                self.advance();
                ExprKind::Int(digits.parse::<BigInt>().expect("lexer yields digits"))
            }
            Tok::Str(value) => {
                self.advance();
                ExprKind::Str(value)
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                return Ok(Expr { kind: inner.kind, span: start.to(end) });
            }
            Tok::Ident(name) => match name.as_str() {
                "true" | "false" => {
                    self.advance();
                    ExprKind::Bool(name == "true")
                }
                "len" => {
                    self.advance();
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    ExprKind::Len(Box::new(arg))
                }
                "matches" => {
                    self.advance();
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let pattern = self.string()?;
                    self.expect(Tok::RParen)?;
                    ExprKind::Matches(Box::new(arg), pattern)
                }
                _ if matches!(self.peek_at(1), Tok::Dot) => ExprKind::Call(self.call()?),
                _ => ExprKind::Var(self.ident()?.0),
            },
            _ => return self.error("expression"),
        };
        Ok(Expr { kind, span: start.to(self.prev_span()) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(text: &str) -> SourceFile {
        let (file, err) = parse_file(text, FileId(0));
        assert_eq!(err, None);
        file
    }

    #[test]
    fn parses_method_with_attribute() {
        let file = parse_ok(
            r#"namespace N { class C {
                @endpoint("POST", "/x")
                fn f(a: int, b: string) -> bool { return a + 1 * 2 < len(b) && matches(b, "[a-z]+"); }
            } }"#,
        );
        let method = &file.namespaces[0].classes[0].methods[0];
        assert_eq!(method.endpoint(), Some(("POST", "/x")));
        assert_eq!(method.params.len(), 2);
        assert_eq!(method.ret, Some(Type::Bool));
        let StmtKind::Return(Some(expr)) = &method.body.stmts[0].kind else { panic!() };
        let ExprKind::Binary(BinOp::And, lhs, _) = &expr.kind else { panic!("{expr:?}") };
        let ExprKind::Binary(BinOp::Lt, sum, _) = &lhs.kind else { panic!() };
        assert!(matches!(&sum.kind, ExprKind::Binary(BinOp::Add, _, _)));
    }

    #[test]
    fn top_level_fn_is_rejected() {
        let (file, err) = parse_file("fn main() {}", FileId(0));
        assert!(file.namespaces.is_empty());
        let err = err.unwrap();
        assert!(err.message.starts_with("expected namespace"), "{}", err.message);
        assert_eq!((err.pos.line, err.pos.col), (1, 1));
    }

    #[test]
    fn keeps_namespaces_before_error() {
        let (file, err) = parse_file("namespace A {} namespace B { class }", FileId(0));
        assert_eq!(file.namespaces.len(), 1);
        assert!(err.is_some());
    }

    #[test]
    fn statements() {
        let file = parse_ok(
            "namespace N { class C { fn f(x: int) { let y = -x; y = y % 3; \
             if (!(y == 0)) { N.C.f(y); } else { return; } while (y > 0) { y = y - 1; } } } }",
        );
        let stmts = &file.namespaces[0].classes[0].methods[0].body.stmts;
        assert_eq!(stmts.len(), 4);
        assert!(matches!(stmts[2].kind, StmtKind::If { else_block: Some(_), .. }));
    }

    #[test]
    fn keywords_are_not_identifiers() {
        let (_, err) = parse_file("namespace N { class C { fn f() { let while = 1; } } }", FileId(0));
        assert!(err.unwrap().message.starts_with("expected identifier"));
    }
}
