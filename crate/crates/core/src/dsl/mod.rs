//! Textual front end: the contract DSL, its canonical printer, and the
//! Solidity-subset syntax checker used for embedded guards and statements.

pub mod classify;
pub mod lexer;
mod parser;
pub mod syntax;

use std::fmt::Write as _;

pub use classify::{Analysis, SymbolEnv};
pub use parser::parse_contract;

use crate::diag::{codes, has_errors, Diagnostic};
use crate::expr::Expression;
use crate::model::{Contract, Variable};
use lexer::tokenize;
use syntax::{Cursor, SynExpr, SynStmt};

/// Where a snippet is going to be used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnippetContext {
    ExprContext,
    StmtContext,
}

/// Parses a complete expression; trailing tokens are an error.
pub fn parse_expr_text(src: &str) -> Result<SynExpr, Diagnostic> {
    let mut cur = Cursor::new(tokenize(src)?);
    let e = cur.parse_expr()?;
    if !cur.at_eof() {
        return Err(cur.unexpected("end of expression"));
    }
    Ok(e)
}

/// Parses a single statement, with or without its trailing `;`.
pub fn parse_stmt_text(src: &str) -> Result<SynStmt, Diagnostic> {
    let mut cur = Cursor::new(tokenize(src)?);
    let s = cur.parse_stmt()?;
    cur.eat_punct(";");
    if !cur.at_eof() {
        return Err(cur.unexpected("end of statement"));
    }
    Ok(s)
}

/// Parses `;`-separated statements; the final `;` is optional.
pub fn parse_stmts_text(src: &str) -> Result<Vec<SynStmt>, Diagnostic> {
    let mut cur = Cursor::new(tokenize(src)?);
    let mut out = Vec::new();
    loop {
        out.push(cur.parse_stmt()?);
        if !cur.eat_punct(";") || cur.at_eof() {
            break;
        }
    }
    if !cur.at_eof() {
        return Err(cur.unexpected("`;` or end of input"));
    }
    Ok(out)
}

/// Checks a snippet against the supported Solidity grammar subset. Never
/// panics; an empty result means the snippet is well-formed.
pub fn check_solidity_syntax(snippet: &str, context: SnippetContext) -> Vec<Diagnostic> {
    let result = match context {
        SnippetContext::ExprContext => parse_expr_text(snippet).map(drop),
        SnippetContext::StmtContext => parse_stmts_text(snippet).map(drop),
    };
    match result {
        Ok(()) => Vec::new(),
        Err(d) => vec![d],
    }
}

/// Classifies an expression as interpretable core or opaque Solidity.
pub fn classify_expression(snippet: &str, env: &SymbolEnv) -> Expression {
    match parse_expr_text(snippet) {
        Ok(e) => classify::expression_from_syn(&e, env),
        Err(_) => Expression::Opaque { text: snippet.trim().to_string() },
    }
}

/// Canonical text for a contract that validates without errors.
pub fn serialize_contract(contract: &Contract) -> Result<String, Vec<Diagnostic>> {
    let diags = crate::validate::validate(contract);
    if has_errors(&diags) {
        return Err(diags.into_iter().filter(Diagnostic::is_error).collect());
    }
    Ok(render_contract(contract))
}

fn param_list(vars: &[Variable]) -> String {
    vars.iter().map(|v| format!("{} {}", v.ty, v.name)).collect::<Vec<_>>().join(", ")
}

/// Canonical printer; does not validate.
pub fn render_contract(c: &Contract) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "contract {} {{", c.name);
    for s in &c.states {
        let init = if s.is_initial { "initial " } else { "" };
        let _ = writeln!(out, "    state {init}{};", s.name);
    }
    for s in &c.custom_types {
        out.push('\n');
        let _ = writeln!(out, "    struct {} {{", s.name);
        for f in &s.fields {
            let _ = writeln!(out, "        {} {};", f.ty, f.name);
        }
        out.push_str("    }\n");
    }
    if !c.variables.is_empty() {
        out.push('\n');
    }
    for v in &c.variables {
        let vis = v.visibility.map_or("private", |v| v.keyword());
        let _ = write!(out, "    var {vis} {} {}", v.ty, v.name);
        if let Some(init) = &v.initializer {
            let _ = write!(out, " = {}", init.text());
        }
        out.push_str(";\n");
    }
    for t in &c.transitions {
        out.push('\n');
        let _ = writeln!(out, "    transition {} {{", t.name);
        let _ = writeln!(out, "        from {};", t.from);
        let _ = writeln!(out, "        to {};", t.to);
        if !t.tags.is_empty() {
            let _ = writeln!(out, "        tags {};", t.tags.names().join(", "));
        }
        if !t.input.is_empty() {
            let _ = writeln!(out, "        input {};", param_list(&t.input));
        }
        if !t.output.is_empty() {
            let _ = writeln!(out, "        output {};", param_list(&t.output));
        }
        render_body(&mut out, t.guards.iter().map(Expression::text), t.statements.iter().map(|s| s.text.as_str()));
        out.push_str("    }\n");
    }
    for t in &c.timed_transitions {
        out.push('\n');
        let _ = writeln!(out, "    timed transition {} {{", t.name);
        let _ = writeln!(out, "        from {};", t.from);
        let _ = writeln!(out, "        to {};", t.to);
        let _ = writeln!(out, "        time {};", t.time);
        render_body(&mut out, t.guards.iter().map(Expression::text), t.statements.iter().map(|s| s.text.as_str()));
        out.push_str("    }\n");
    }
    out.push_str("}\n");
    out
}

fn render_body<'a>(
    out: &mut String,
    guards: impl Iterator<Item = &'a str>,
    stmts: impl ExactSizeIterator<Item = &'a str>,
) {
    for g in guards {
        let _ = writeln!(out, "        guard {g};");
    }
    if stmts.len() > 0 {
        out.push_str("        do {\n");
        for s in stmts {
            let _ = writeln!(out, "            {s};");
        }
        out.push_str("        }\n");
    }
}

/// Parse diagnostics carry their position in the node path; this pulls the
/// line back out for callers that report it.
pub fn diagnostic_line(d: &Diagnostic) -> Option<usize> {
    if d.code != codes::E_PARSE && d.code != codes::E_DUPLICATE_NAME && d.code != codes::E_UNSUPPORTED_TYPE {
        return None;
    }
    d.node_path.strip_prefix("source/")?.split(':').next()?.parse().ok()
}
