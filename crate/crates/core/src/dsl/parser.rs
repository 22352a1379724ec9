//! Contract-level grammar.

use std::collections::BTreeSet;

use super::classify::{expression_from_syn, statements_from_syn, SymbolEnv};
use super::lexer::{tokenize, Pos, TokenKind};
use super::syntax::{Cursor, PResult, SynExpr, SynStmt};
use crate::diag::{codes, Diagnostic};
use crate::expr::TypeRef;
use crate::model::{
    Contract, StateDecl, StructDecl, StructField, Tags, TimedTransition, Transition, Variable, Visibility,
};

struct RawVar {
    visibility: Visibility,
    ty: TypeRef,
    name: String,
    init: Option<SynExpr>,
}

struct RawTransition {
    name: String,
    from: String,
    to: String,
    tags: Tags,
    input: Vec<(TypeRef, String)>,
    output: Vec<(TypeRef, String)>,
    guards: Vec<SynExpr>,
    stmts: Vec<SynStmt>,
}

struct RawTimed {
    name: String,
    from: String,
    to: String,
    time: u64,
    guards: Vec<SynExpr>,
    stmts: Vec<SynStmt>,
}

#[derive(Default)]
struct Raw {
    name: String,
    states: Vec<StateDecl>,
    vars: Vec<RawVar>,
    structs: Vec<StructDecl>,
    transitions: Vec<RawTransition>,
    timed: Vec<RawTimed>,
    duplicates: Vec<Diagnostic>,
}

pub fn parse_contract(source: &str) -> Result<Contract, Vec<Diagnostic>> {
    let toks = tokenize(source).map_err(|d| vec![d])?;
    let mut cur = Cursor::new(toks);
    let raw = parse_raw(&mut cur).map_err(|d| vec![d])?;
    if !raw.duplicates.is_empty() {
        return Err(raw.duplicates);
    }
    Ok(build(raw))
}

fn parse_raw(cur: &mut Cursor) -> PResult<Raw> {
    let mut raw = Raw::default();
    cur.expect_keyword("contract")?;
    raw.name = cur.expect_ident()?;
    cur.expect_punct("{")?;
    let mut seen: [BTreeSet<String>; 5] = Default::default();
    let mut note = |raw: &mut Raw, ns: usize, kind: &str, name: &str, pos: Pos| {
        if !seen[ns].insert(name.to_string()) {
            raw.duplicates.push(Diagnostic::error(
                codes::E_DUPLICATE_NAME,
                pos.path(),
                format!("duplicate {kind} `{name}`"),
            ));
        }
    };
    while !cur.eat_punct("}") {
        let pos = cur.pos();
        match cur.peek().clone() {
            TokenKind::Ident(kw) if kw == "state" => {
                cur.bump();
                let is_initial = cur.is_keyword("initial") && matches!(cur.peek_at(1), TokenKind::Ident(_));
                if is_initial {
                    cur.bump();
                }
                let name = cur.expect_ident()?;
                cur.expect_punct(";")?;
                note(&mut raw, 0, "state", &name, pos);
                raw.states.push(StateDecl { name, is_initial });
            }
            TokenKind::Ident(kw) if kw == "var" => {
                cur.bump();
                let visibility = if cur.eat_keyword("public") {
                    Visibility::Public
                } else if cur.eat_keyword("private") {
                    Visibility::Private
                } else {
                    return Err(cur.unexpected("`public` or `private`"));
                };
                let ty = cur.parse_type()?;
                let name = cur.expect_ident()?;
                let init = if cur.eat_punct("=") { Some(cur.parse_expr()?) } else { None };
                cur.expect_punct(";")?;
                note(&mut raw, 1, "variable", &name, pos);
                raw.vars.push(RawVar { visibility, ty, name, init });
            }
            TokenKind::Ident(kw) if kw == "struct" => {
                cur.bump();
                let name = cur.expect_ident()?;
                cur.expect_punct("{")?;
                let mut fields = Vec::new();
                loop {
                    let ty = cur.parse_type()?;
                    let fname = cur.expect_ident()?;
                    cur.expect_punct(";")?;
                    fields.push(StructField { name: fname, ty });
                    if cur.eat_punct("}") {
                        break;
                    }
                }
                note(&mut raw, 2, "struct", &name, pos);
                raw.structs.push(StructDecl { name, fields });
            }
            TokenKind::Ident(kw) if kw == "transition" => {
                if raw.states.is_empty() {
                    return Err(Diagnostic::error(
                        codes::E_PARSE,
                        pos.path(),
                        format!("transition declared before any state (line {})", pos.line),
                    ));
                }
                cur.bump();
                let t = parse_transition(cur)?;
                note(&mut raw, 3, "transition", &t.name, pos);
                raw.transitions.push(t);
            }
            TokenKind::Ident(kw) if kw == "timed" => {
                if raw.states.is_empty() {
                    return Err(Diagnostic::error(
                        codes::E_PARSE,
                        pos.path(),
                        format!("timed transition declared before any state (line {})", pos.line),
                    ));
                }
                cur.bump();
                cur.expect_keyword("transition")?;
                let t = parse_timed(cur)?;
                note(&mut raw, 4, "timed transition", &t.name, pos);
                raw.timed.push(t);
            }
            _ => return Err(cur.unexpected("`state`, `var`, `struct`, `transition`, `timed` or `}`")),
        }
    }
    if !cur.at_eof() {
        return Err(cur.unexpected("end of input"));
    }
    Ok(raw)
}

fn parse_endpoints(cur: &mut Cursor) -> PResult<(String, String, String)> {
    let name = cur.expect_ident()?;
    cur.expect_punct("{")?;
    cur.expect_keyword("from")?;
    let from = cur.expect_ident()?;
    cur.expect_punct(";")?;
    cur.expect_keyword("to")?;
    let to = cur.expect_ident()?;
    cur.expect_punct(";")?;
    Ok((name, from, to))
}

fn parse_params(cur: &mut Cursor) -> PResult<Vec<(TypeRef, String)>> {
    let mut out = Vec::new();
    loop {
        let ty = cur.parse_type()?;
        let name = cur.expect_ident()?;
        out.push((ty, name));
        if !cur.eat_punct(",") {
            break;
        }
    }
    cur.expect_punct(";")?;
    Ok(out)
}

fn parse_guards_and_body(cur: &mut Cursor) -> PResult<(Vec<SynExpr>, Vec<SynStmt>)> {
    let mut guards = Vec::new();
    while cur.eat_keyword("guard") {
        guards.push(cur.parse_expr()?);
        cur.expect_punct(";")?;
    }
    let mut stmts = Vec::new();
    if cur.eat_keyword("do") {
        cur.expect_punct("{")?;
        while !cur.eat_punct("}") {
            stmts.push(cur.parse_stmt()?);
            cur.expect_punct(";")?;
        }
    }
    cur.expect_punct("}")?;
    Ok((guards, stmts))
}

fn parse_transition(cur: &mut Cursor) -> PResult<RawTransition> {
    let (name, from, to) = parse_endpoints(cur)?;
    let mut tags = Tags::default();
    if cur.eat_keyword("tags") {
        loop {
            let pos = cur.pos();
            let tag = cur.expect_ident()?;
            let slot = match tag.as_str() {
                "payable" => &mut tags.payable,
                "admin" => &mut tags.admin,
                "event" => &mut tags.event,
                other => return Err(Diagnostic::error(codes::E_PARSE, pos.path(), format!("unknown tag `{other}`"))),
            };
            if *slot {
                return Err(Diagnostic::error(codes::E_PARSE, pos.path(), format!("duplicate tag `{tag}`")));
            }
            *slot = true;
            if !cur.eat_punct(",") {
                break;
            }
        }
        cur.expect_punct(";")?;
    }
    let input = if cur.eat_keyword("input") { parse_params(cur)? } else { Vec::new() };
    let output = if cur.eat_keyword("output") { parse_params(cur)? } else { Vec::new() };
    let (guards, stmts) = parse_guards_and_body(cur)?;
    Ok(RawTransition { name, from, to, tags, input, output, guards, stmts })
}

fn parse_timed(cur: &mut Cursor) -> PResult<RawTimed> {
    let (name, from, to) = parse_endpoints(cur)?;
    cur.expect_keyword("time")?;
    let time = parse_duration(cur)?;
    cur.expect_punct(";")?;
    let (guards, stmts) = parse_guards_and_body(cur)?;
    Ok(RawTimed { name, from, to, time, guards, stmts })
}

fn parse_duration(cur: &mut Cursor) -> PResult<u64> {
    let pos = cur.pos();
    let TokenKind::Number(lexeme) = cur.peek().clone() else {
        return Err(cur.unexpected("duration"));
    };
    cur.bump();
    let factor: u64 = match cur.peek() {
        TokenKind::Ident(u) => {
            let f = match u.as_str() {
                "seconds" => 1,
                "minutes" => 60,
                "hours" => 3_600,
                "days" => 86_400,
                "weeks" => 604_800,
                _ => 0,
            };
            if f > 0 {
                cur.bump();
                f
            } else {
                1
            }
        }
        _ => 1,
    };
    let base = super::classify::parse_number(&lexeme).filter(|n| n.bits() <= 64).map(|n| n.low_u64());
    base.and_then(|b| b.checked_mul(factor))
        .ok_or_else(|| Diagnostic::error(codes::E_PARSE, pos.path(), "time does not fit in 64 bits"))
}

fn build(raw: Raw) -> Contract {
    let mut contract = Contract {
        name: raw.name,
        states: raw.states,
        variables: Vec::new(),
        custom_types: raw.structs,
        transitions: Vec::new(),
        timed_transitions: Vec::new(),
    };
    contract.variables =
        raw.vars.iter().map(|v| Variable::contract(v.name.clone(), v.ty.clone(), v.visibility)).collect();
    let env = SymbolEnv::for_contract(&contract);
    for (var, rv) in contract.variables.iter_mut().zip(&raw.vars) {
        var.initializer = rv.init.as_ref().map(|e| expression_from_syn(e, &env));
    }
    for rt in raw.transitions {
        let mut t = Transition {
            name: rt.name,
            from: rt.from,
            to: rt.to,
            guards: Vec::new(),
            input: rt.input.into_iter().map(|(ty, n)| Variable::input(n, ty)).collect(),
            output: rt.output.into_iter().map(|(ty, n)| Variable::output(n, ty)).collect(),
            statements: Vec::new(),
            tags: rt.tags,
        };
        let genv = SymbolEnv::for_guards(&contract, &t);
        t.guards = rt.guards.iter().map(|g| expression_from_syn(g, &genv)).collect();
        let senv = SymbolEnv::for_statements(&contract, &t);
        t.statements = statements_from_syn(&rt.stmts, &senv);
        contract.transitions.push(t);
    }
    for rt in raw.timed {
        let t = TimedTransition {
            name: rt.name,
            from: rt.from,
            to: rt.to,
            guards: rt.guards.iter().map(|g| expression_from_syn(g, &env)).collect(),
            statements: statements_from_syn(&rt.stmts, &env),
            time: rt.time,
        };
        contract.timed_transitions.push(t);
    }
    contract
}
