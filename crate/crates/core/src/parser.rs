//! Lexer and recursive-descent parser.

use thiserror::Error;

use crate::ast::*;
use crate::event::{normalize, DelayExpr, EventExpr, Interval, RawEvent};
use crate::span::{line_col, Span};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub message: String,
    pub expected: Option<String>,
    pub span: Span,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Punct(&'static str),
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const PUNCTS: [&str; 19] = [
    ":=", "->", ">=", "<", ">", "(", ")", "[", "]", "{", "}", ",", ";", ":", "=", "-", "+", "@",
    ".",
];

struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(src: &str, file: u32) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), start, end: i });
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i].parse::<u64>().map_err(|_| {
                error(src, file, start, i, format!("integer literal `{}` is too large", &src[start..i]), None)
            })?;
            out.push(Token { tok: Tok::Int(n), start, end: i });
            continue;
        }
        match PUNCTS.iter().find(|p| src[i..].starts_with(**p)) {
            Some(p) => {
                i += p.len();
                out.push(Token { tok: Tok::Punct(p), start, end: i });
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(error(src, file, i, i + ch.len_utf8(), format!("unexpected character `{ch}`"), None));
            }
        }
    }
    out.push(Token { tok: Tok::Eof, start: src.len(), end: src.len() });
    Ok(out)
}

fn error(src: &str, file: u32, start: usize, end: usize, message: String, expected: Option<String>) -> ParseError {
    let lc = line_col(src, start);
    ParseError { message, expected, span: Span::new(file, start, end), line: lc.line, col: lc.col }
}

/// Parses a whole source file.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    parse_file(src, 0)
}

pub fn parse_file(src: &str, file: u32) -> Result<Program, ParseError> {
    let tokens = lex(src, file)?;
    let mut p = Parser { src, file, tokens, pos: 0 };
    p.program()
}

struct Parser<'a> {
    src: &'a str,
    file: u32,
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 { 0 } else { self.tokens[self.pos - 1].end }
    }

    fn span_from(&self, start: usize) -> Span {
        Span::new(self.file, start, self.prev_end())
    }

    fn start(&self) -> usize {
        self.tokens[self.pos].start
    }

    fn bump(&mut self) -> &Tok {
        let t = &self.tokens[self.pos].tok;
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = &self.tokens[self.pos];
        error(
            self.src,
            self.file,
            t.start,
            t.end,
            format!("expected {expected}, found {}", t.tok),
            Some(expected.to_string()),
        )
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> PResult<()> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("integer")),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut components = Vec::new();
        while *self.peek() != Tok::Eof {
            components.push(self.component()?);
        }
        Ok(Program { components, entry: None })
    }

    fn component(&mut self) -> PResult<ComponentDef> {
        let start = self.start();
        let is_extern = if self.is_kw("extern") {
            self.bump();
            true
        } else {
            false
        };
        self.expect_kw("comp")?;
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat("[") {
            loop {
                params.push(self.ident()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("]")?;
        }
        self.expect("<")?;
        let mut events = Vec::new();
        loop {
            let es = self.start();
            let var = self.ident()?;
            self.expect(":")?;
            let delay = self.delay()?;
            events.push(EventBinding { var, delay, span: self.span_from(es) });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(">")?;
        let inputs = self.port_list()?;
        self.expect("->")?;
        let outputs = self.port_list()?;
        let mut where_constraints = Vec::new();
        if self.is_kw("where") {
            self.bump();
            loop {
                let cs = self.start();
                let lhs = self.event_expr()?;
                let op = if self.eat(">=") {
                    CmpOp::Ge
                } else if self.eat(">") {
                    CmpOp::Gt
                } else {
                    return Err(self.unexpected("`>` or `>=`"));
                };
                let rhs = self.event_expr()?;
                where_constraints.push(OrderingConstraint { lhs, op, rhs, span: self.span_from(cs) });
                if !self.eat(",") {
                    break;
                }
            }
        }
        let mut body = Vec::new();
        let mut has_body = false;
        if self.eat("{") {
            has_body = true;
            while !self.is("}") {
                if *self.peek() == Tok::Eof {
                    return Err(self.unexpected("`}`"));
                }
                body.push(self.command()?);
            }
            self.expect("}")?;
        } else {
            self.expect(";")?;
        }
        Ok(ComponentDef {
            name,
            is_extern,
            params,
            events,
            inputs,
            outputs,
            where_constraints,
            body,
            has_body,
            span: self.span_from(start),
        })
    }

    fn port_list(&mut self) -> PResult<Vec<PortDef>> {
        self.expect("(")?;
        let mut ports = Vec::new();
        while !self.is(")") {
            ports.push(self.port()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(ports)
    }

    fn port(&mut self) -> PResult<PortDef> {
        let start = self.start();
        let kind = if self.eat("@") {
            if self.is_kw("interface") {
                self.bump();
                self.expect("[")?;
                let e = self.ident()?;
                self.expect("]")?;
                PortKind::Interface(e)
            } else {
                self.expect("[")?;
                let s = self.event_expr()?;
                self.expect(",")?;
                let e = self.event_expr()?;
                self.expect("]")?;
                PortKind::Data(Interval::new(s, e))
            }
        } else {
            PortKind::Clock
        };
        let name = self.ident()?;
        self.expect(":")?;
        let width = match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Width::Const(n)
            }
            Tok::Ident(s) => {
                self.bump();
                Width::Param(s)
            }
            _ => return Err(self.unexpected("port width")),
        };
        Ok(PortDef { name, width, kind, span: self.span_from(start) })
    }

    fn delay(&mut self) -> PResult<DelayExpr> {
        if let (Tok::Int(n), next) = (self.peek().clone(), self.peek_at(1)) {
            if !matches!(next, Tok::Punct("+")) {
                self.bump();
                return Ok(DelayExpr::Const(n));
            }
        }
        let a = self.event_expr()?;
        self.expect("-")?;
        let b = self.event_expr()?;
        Ok(DelayExpr::Diff(a, b))
    }

    fn event_expr(&mut self) -> PResult<EventExpr> {
        let start = self.start();
        let raw = self.raw_event()?;
        normalize(&raw).map_err(|e| {
            let end = self.prev_end();
            error(self.src, self.file, start, end, e.to_string(), None)
        })
    }

    fn raw_event(&mut self) -> PResult<RawEvent> {
        let mut lhs = self.raw_term()?;
        while self.eat("+") {
            let rhs = self.raw_term()?;
            lhs = RawEvent::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn raw_term(&mut self) -> PResult<RawEvent> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(RawEvent::Var(s))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(RawEvent::Const(n))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.raw_event()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => Err(self.unexpected("event expression")),
        }
    }

    fn port_ref(&mut self) -> PResult<PortRef> {
        let start = self.start();
        let first = self.ident()?;
        let r = if self.eat(".") {
            let port = self.ident()?;
            PortRef { owner: Some(first), port, span: Span::default() }
        } else {
            PortRef { owner: None, port: first, span: Span::default() }
        };
        Ok(PortRef { span: self.span_from(start), ..r })
    }

    fn command(&mut self) -> PResult<Command> {
        let start = self.start();
        if matches!(self.peek_at(1), Tok::Punct(":=")) {
            let name = self.ident()?;
            self.expect(":=")?;
            if self.is_kw("new") {
                self.bump();
                let component = self.ident()?;
                let mut params = Vec::new();
                if self.eat("[") {
                    loop {
                        params.push(self.int()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                    self.expect("]")?;
                }
                self.expect(";")?;
                return Ok(Command::Instantiate { name, component, params, span: self.span_from(start) });
            }
            let instance = self.ident()?;
            self.expect("<")?;
            let mut events = Vec::new();
            loop {
                events.push(self.event_expr()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(">")?;
            self.expect("(")?;
            let mut args = Vec::new();
            while !self.is(")") {
                args.push(self.port_ref()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
            self.expect(";")?;
            return Ok(Command::Invoke { name, instance, events, args, span: self.span_from(start) });
        }
        if !matches!(self.peek(), Tok::Ident(_)) {
            return Err(self.unexpected("command"));
        }
        let dst = self.port_ref()?;
        self.expect("=")?;
        let src = self.port_ref()?;
        self.expect(";")?;
        Ok(Command::Connect { dst, src, span: self.span_from(start) })
    }
}
