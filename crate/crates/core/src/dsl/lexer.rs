use std::fmt;

use crate::diag::{codes, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Decimal or `0x` hexadecimal lexeme, kept verbatim.
    Number(String),
    /// String literal lexeme including its quotes.
    Str(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Number(s) => write!(f, "number `{s}`"),
            TokenKind::Str(s) => write!(f, "string {s}"),
            TokenKind::Punct(p) => write!(f, "`{p}`"),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub fn path(self) -> String {
        format!("source/{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

// Longest first so that greedy matching picks `<=` over `<`.
const PUNCT: &[&str] = &[
    "**", "=>", "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "<<", ">>", "+", "-", "*", "/", "%",
    "<", ">", "=", "!", "(", ")", "[", "]", "{", "}", ",", ";", ".", ":", "?", "&", "|", "^", "~",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! advance {
        ($n:expr) => {{
            for _ in 0..$n {
                if bytes[i] == b'\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        }};
    }

    while i < bytes.len() {
        let c = bytes[i];
        let pos = Pos { line, col };
        if c.is_ascii_whitespace() {
            advance!(1);
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                advance!(1);
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            advance!(2);
            loop {
                if i + 1 >= bytes.len() {
                    return Err(Diagnostic::error(codes::E_PARSE, pos.path(), "unterminated block comment"));
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    advance!(2);
                    break;
                }
                advance!(1);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                advance!(1);
            }
            out.push(Token { kind: TokenKind::Ident(src[start..i].to_string()), pos });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            if c == b'0' && matches!(bytes.get(i + 1), Some(b'x') | Some(b'X')) {
                advance!(2);
                let digits = i;
                while i < bytes.len() && bytes[i].is_ascii_hexdigit() {
                    advance!(1);
                }
                if i == digits {
                    return Err(Diagnostic::error(codes::E_PARSE, pos.path(), "hex literal without digits"));
                }
            } else {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    advance!(1);
                }
            }
            if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                return Err(Diagnostic::error(codes::E_PARSE, Pos { line, col }.path(), "malformed number literal"));
            }
            out.push(Token { kind: TokenKind::Number(src[start..i].to_string()), pos });
            continue;
        }
        if c == b'"' || c == b'\'' {
            let start = i;
            advance!(1);
            loop {
                match bytes.get(i) {
                    None | Some(b'\n') => {
                        return Err(Diagnostic::error(codes::E_PARSE, pos.path(), "unterminated string literal"))
                    }
                    Some(b'\\') if i + 1 < bytes.len() && bytes[i + 1] != b'\n' => advance!(2),
                    Some(&q) if q == c => {
                        advance!(1);
                        break;
                    }
                    Some(_) => advance!(1),
                }
            }
            out.push(Token { kind: TokenKind::Str(src[start..i].to_string()), pos });
            continue;
        }
        match PUNCT.iter().find(|p| src[i..].starts_with(**p)) {
            Some(p) => {
                advance!(p.len());
                out.push(Token { kind: TokenKind::Punct(p), pos });
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(Diagnostic::error(codes::E_PARSE, pos.path(), format!("unexpected character `{ch}`")));
            }
        }
    }
    out.push(Token { kind: TokenKind::Eof, pos: Pos { line, col } });
    Ok(out)
}
