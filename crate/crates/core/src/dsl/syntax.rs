//! Syntax trees for the supported Solidity expression/statement subset, the
//! recursive-descent parser that builds them, and the canonical printer.

use std::fmt;

use super::lexer::{Pos, Token, TokenKind};
use crate::diag::{codes, Diagnostic};
use crate::expr::TypeRef;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynExpr {
    Number { lexeme: String, unit: Option<String> },
    Str(String),
    Bool(bool),
    Ident(String),
    Paren(Box<SynExpr>),
    Member(Box<SynExpr>, String),
    Index(Box<SynExpr>, Box<SynExpr>),
    Call(Box<SynExpr>, CallArgs),
    Unary(&'static str, Box<SynExpr>),
    Binary(&'static str, Box<SynExpr>, Box<SynExpr>),
    Ternary(Box<SynExpr>, Box<SynExpr>, Box<SynExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CallArgs {
    Positional(Vec<SynExpr>),
    Named(Vec<(String, SynExpr)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynStmt {
    LocalDecl { ty: TypeRef, name: String, init: Option<SynExpr> },
    Assign { target: SynExpr, op: &'static str, value: SynExpr },
    Expr(SynExpr),
}

pub const UNITS: &[&str] =
    &["wei", "szabo", "finney", "ether", "seconds", "minutes", "hours", "days", "weeks", "years"];

impl SynExpr {
    /// Calls `f` on every identifier in value position (not member names,
    /// not named-argument labels).
    pub fn for_each_ident(&self, f: &mut impl FnMut(&str)) {
        match self {
            SynExpr::Ident(name) => f(name),
            SynExpr::Number { .. } | SynExpr::Str(_) | SynExpr::Bool(_) => {}
            SynExpr::Paren(e) | SynExpr::Member(e, _) | SynExpr::Unary(_, e) => e.for_each_ident(f),
            SynExpr::Index(a, b) | SynExpr::Binary(_, a, b) => {
                a.for_each_ident(f);
                b.for_each_ident(f);
            }
            SynExpr::Call(callee, args) => {
                callee.for_each_ident(f);
                match args {
                    CallArgs::Positional(v) => v.iter().for_each(|e| e.for_each_ident(f)),
                    CallArgs::Named(v) => v.iter().for_each(|(_, e)| e.for_each_ident(f)),
                }
            }
            SynExpr::Ternary(a, b, c) => {
                a.for_each_ident(f);
                b.for_each_ident(f);
                c.for_each_ident(f);
            }
        }
    }
}

impl SynStmt {
    pub fn for_each_ident(&self, f: &mut impl FnMut(&str)) {
        match self {
            SynStmt::LocalDecl { ty, init, .. } => {
                ty.for_each_struct(f);
                if let Some(e) = init {
                    e.for_each_ident(f);
                }
            }
            SynStmt::Assign { target, value, .. } => {
                target.for_each_ident(f);
                value.for_each_ident(f);
            }
            SynStmt::Expr(e) => e.for_each_ident(f),
        }
    }
}

impl fmt::Display for SynExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynExpr::Number { lexeme, unit: None } => f.write_str(lexeme),
            SynExpr::Number { lexeme, unit: Some(u) } => write!(f, "{lexeme} {u}"),
            SynExpr::Str(s) => f.write_str(s),
            SynExpr::Bool(b) => write!(f, "{b}"),
            SynExpr::Ident(s) => f.write_str(s),
            SynExpr::Paren(e) => write!(f, "({e})"),
            SynExpr::Member(e, m) => write!(f, "{e}.{m}"),
            SynExpr::Index(e, i) => write!(f, "{e}[{i}]"),
            SynExpr::Call(callee, CallArgs::Positional(args)) => {
                write!(f, "{callee}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            SynExpr::Call(callee, CallArgs::Named(args)) => {
                write!(f, "{callee}({{")?;
                for (i, (n, a)) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{n}: {a}")?;
                }
                f.write_str("})")
            }
            SynExpr::Unary(op, e) => write!(f, "{op}{e}"),
            SynExpr::Binary(op, a, b) => write!(f, "{a} {op} {b}"),
            SynExpr::Ternary(c, a, b) => write!(f, "{c} ? {a} : {b}"),
        }
    }
}

impl fmt::Display for SynStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynStmt::LocalDecl { ty, name, init: None } => write!(f, "{ty} {name}"),
            SynStmt::LocalDecl { ty, name, init: Some(e) } => write!(f, "{ty} {name} = {e}"),
            SynStmt::Assign { target, op, value } => write!(f, "{target} {op} {value}"),
            SynStmt::Expr(e) => write!(f, "{e}"),
        }
    }
}

/// Elementary Solidity type names outside the supported set.
fn is_unsupported_elementary(name: &str) -> bool {
    let sized = |prefix: &str| {
        name.strip_prefix(prefix).is_some_and(|rest| rest.is_empty() || rest.chars().all(|c| c.is_ascii_digit()))
    };
    matches!(name, "byte" | "fixed" | "ufixed" | "var")
        || sized("uint")
        || sized("int")
        || sized("bytes")
        || name.starts_with("fixed")
        || name.starts_with("ufixed")
}

/// Token cursor with the expression, statement and type grammars. The
/// contract-level grammar in `parser.rs` drives the same cursor.
pub struct Cursor {
    toks: Vec<Token>,
    at: usize,
    depth: usize,
}

const MAX_NESTING: usize = 128;

/// Binary operators from loosest to tightest binding.
const BINARY_LEVELS: &[&[&str]] = &[
    &["||"],
    &["&&"],
    &["==", "!="],
    &["<", ">", "<=", ">="],
    &["|"],
    &["^"],
    &["&"],
    &["<<", ">>"],
    &["+", "-"],
    &["*", "/", "%"],
    &["**"],
];

fn binary_level(op: &str) -> Option<usize> {
    BINARY_LEVELS.iter().position(|ops| ops.contains(&op))
}

pub type PResult<T> = Result<T, Diagnostic>;

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, at: 0, depth: 0 }
    }

    pub fn peek(&self) -> &TokenKind {
        &self.toks[self.at].kind
    }

    pub fn peek_at(&self, n: usize) -> &TokenKind {
        let i = (self.at + n).min(self.toks.len() - 1);
        &self.toks[i].kind
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), TokenKind::Eof)
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), TokenKind::Punct(q) if *q == p)
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == kw)
    }

    pub fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error_here(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error(codes::E_PARSE, self.pos().path(), msg)
    }

    pub fn unexpected(&self, wanted: &str) -> Diagnostic {
        self.error_here(format!("expected {wanted}, found {}", self.peek()))
    }

    pub fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn expect_ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            TokenKind::Ident(s) => {
                if !s.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    return Err(self.error_here(format!("identifier `{s}` must start with a letter")));
                }
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub fn parse_type(&mut self) -> PResult<TypeRef> {
        let base = self.depth;
        let ty = self.parse_type_nested();
        self.depth = base;
        ty
    }

    /// Mapping and array constructors count against the nesting limit.
    fn parse_type_nested(&mut self) -> PResult<TypeRef> {
        let pos = self.pos();
        let name = self.expect_ident()?;
        let mut ty = if name == "mapping" {
            self.deepen()?;
            self.expect_punct("(")?;
            let key = self.parse_type_nested()?;
            self.expect_punct("=>")?;
            let value = self.parse_type_nested()?;
            self.expect_punct(")")?;
            TypeRef::Mapping(Box::new(key), Box::new(value))
        } else if let Some(t) = TypeRef::elementary(&name) {
            t
        } else if is_unsupported_elementary(&name) {
            return Err(Diagnostic::error(
                codes::E_UNSUPPORTED_TYPE,
                pos.path(),
                format!("type `{name}` is not supported"),
            ));
        } else {
            TypeRef::Struct(name)
        };
        while self.is_punct("[") && matches!(self.peek_at(1), TokenKind::Punct("]")) {
            self.deepen()?;
            self.bump();
            self.bump();
            ty = TypeRef::Array(Box::new(ty));
        }
        Ok(ty)
    }

    pub fn parse_expr(&mut self) -> PResult<SynExpr> {
        if self.depth >= MAX_NESTING {
            return Err(self.error_here("expression nested too deeply"));
        }
        self.depth += 1;
        let e = self.parse_ternary();
        self.depth -= 1;
        e
    }

    fn parse_ternary(&mut self) -> PResult<SynExpr> {
        let cond = self.parse_binary(0)?;
        if self.is_punct("?") {
            self.deepen()?;
            self.bump();
            let branches = self.parse_ternary().and_then(|a| {
                self.expect_punct(":")?;
                Ok((a, self.parse_ternary()?))
            });
            self.depth -= 1;
            let (a, b) = branches?;
            return Ok(SynExpr::Ternary(Box::new(cond), Box::new(a), Box::new(b)));
        }
        Ok(cond)
    }

    fn parse_binary(&mut self, min_level: usize) -> PResult<SynExpr> {
        let base = self.depth;
        let e = self.parse_binary_from(min_level);
        self.depth = base;
        e
    }

    /// Precedence climbing over [`BINARY_LEVELS`]; operators are
    /// left-associative. Each operator deepens the tree by one level, so it
    /// counts against the nesting limit like a parenthesis.
    fn parse_binary_from(&mut self, min_level: usize) -> PResult<SynExpr> {
        let mut lhs = self.parse_unary()?;
        while let Some((op, level)) = self.peek_binary_op(min_level) {
            self.deepen()?;
            self.bump();
            let rhs = self.parse_binary_from(level + 1)?;
            lhs = SynExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    /// The binary operator at the cursor if it binds at least as tightly
    /// as `min_level`.
    fn peek_binary_op(&self, min_level: usize) -> Option<(&'static str, usize)> {
        match self.peek() {
            TokenKind::Punct(p) => binary_level(p).filter(|l| *l >= min_level).map(|l| (*p, l)),
            _ => None,
        }
    }

    fn deepen(&mut self) -> PResult<()> {
        if self.depth >= MAX_NESTING {
            return Err(self.error_here("expression nested too deeply"));
        }
        self.depth += 1;
        Ok(())
    }

    fn parse_unary(&mut self) -> PResult<SynExpr> {
        for op in ["!", "-", "~"] {
            if self.eat_punct(op) {
                if self.depth >= MAX_NESTING {
                    return Err(self.error_here("expression nested too deeply"));
                }
                self.depth += 1;
                let e = self.parse_unary();
                self.depth -= 1;
                let e = e?;
                return Ok(SynExpr::Unary(op, Box::new(e)));
            }
        }
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> PResult<SynExpr> {
        let base = self.depth;
        let e = self.parse_postfix_chain();
        self.depth = base;
        e
    }

    fn parse_postfix_chain(&mut self) -> PResult<SynExpr> {
        let mut e = self.parse_primary()?;
        loop {
            if self.is_punct(".") || self.is_punct("[") || self.is_punct("(") {
                self.deepen()?;
            }
            if self.eat_punct(".") {
                let m = self.expect_ident()?;
                e = SynExpr::Member(Box::new(e), m);
            } else if self.eat_punct("[") {
                let i = self.parse_expr()?;
                self.expect_punct("]")?;
                e = SynExpr::Index(Box::new(e), Box::new(i));
            } else if self.eat_punct("(") {
                let args = self.parse_call_args()?;
                e = SynExpr::Call(Box::new(e), args);
            } else {
                return Ok(e);
            }
        }
    }

    fn parse_call_args(&mut self) -> PResult<CallArgs> {
        if self.is_punct("{") {
            self.bump();
            let mut named = Vec::new();
            if !self.is_punct("}") {
                loop {
                    let name = self.expect_ident()?;
                    self.expect_punct(":")?;
                    let value = self.parse_expr()?;
                    named.push((name, value));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            self.expect_punct("}")?;
            self.expect_punct(")")?;
            return Ok(CallArgs::Named(named));
        }
        let mut args = Vec::new();
        if !self.eat_punct(")") {
            loop {
                args.push(self.parse_expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(")")?;
        }
        Ok(CallArgs::Positional(args))
    }

    fn parse_primary(&mut self) -> PResult<SynExpr> {
        match self.peek().clone() {
            TokenKind::Number(lexeme) => {
                self.bump();
                let unit = match self.peek() {
                    TokenKind::Ident(u) if UNITS.contains(&u.as_str()) => {
                        let u = u.clone();
                        self.bump();
                        Some(u)
                    }
                    _ => None,
                };
                Ok(SynExpr::Number { lexeme, unit })
            }
            TokenKind::Str(s) => {
                self.bump();
                Ok(SynExpr::Str(s))
            }
            TokenKind::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(SynExpr::Bool(s == "true"))
            }
            TokenKind::Ident(_) => Ok(SynExpr::Ident(self.expect_ident()?)),
            TokenKind::Punct("(") => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect_punct(")")?;
                Ok(SynExpr::Paren(Box::new(e)))
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    /// Parses one statement without its terminating `;`.
    pub fn parse_stmt(&mut self) -> PResult<SynStmt> {
        if self.looks_like_decl() {
            let ty = self.parse_type()?;
            let name = self.expect_ident()?;
            let init = if self.eat_punct("=") { Some(self.parse_expr()?) } else { None };
            return Ok(SynStmt::LocalDecl { ty, name, init });
        }
        let lhs = self.parse_expr()?;
        for op in ["=", "+=", "-=", "*=", "/=", "%="] {
            if self.is_punct(op) {
                let op = match self.bump().kind {
                    TokenKind::Punct(p) => p,
                    _ => unreachable!(),
                };
                if !is_lvalue(&lhs) {
                    return Err(self.error_here("left-hand side of assignment is not assignable"));
                }
                let value = self.parse_expr()?;
                return Ok(SynStmt::Assign { target: lhs, op, value });
            }
        }
        Ok(SynStmt::Expr(lhs))
    }

    /// `T name`, `T[] name` or `mapping(...) name` at the cursor.
    fn looks_like_decl(&self) -> bool {
        let TokenKind::Ident(first) = self.peek() else { return false };
        if first == "mapping" {
            return true;
        }
        let mut n = 1;
        while matches!(self.peek_at(n), TokenKind::Punct("[")) && matches!(self.peek_at(n + 1), TokenKind::Punct("]")) {
            n += 2;
        }
        matches!(self.peek_at(n), TokenKind::Ident(s) if s != "true" && s != "false" && !UNITS.contains(&s.as_str()))
    }
}

fn is_lvalue(e: &SynExpr) -> bool {
    match e {
        SynExpr::Ident(_) => true,
        SynExpr::Member(b, _) | SynExpr::Index(b, _) => is_lvalue(b),
        SynExpr::Paren(b) => is_lvalue(b),
        _ => false,
    }
}
