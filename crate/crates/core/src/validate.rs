//! Structural and semantic checks over a [`Contract`], plus reachability.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::diag::{codes, Diagnostic};
use crate::dsl::classify::{analyze_expr, analyze_stmt, Analysis, SymbolEnv};
use crate::dsl::syntax::{SynExpr, SynStmt};
use crate::dsl::{parse_expr_text, parse_stmt_text};
use crate::expr::{Expression, Statement, TypeRef};
use crate::model::{is_valid_identifier, Contract, VarKind, Variable};

/// Names the emitter itself declares.
const RESERVED: &[&str] = &["state", "States"];

/// Runs every check. The result is sorted by node path (then code), so
/// equal contracts always yield identical lists.
pub fn validate(contract: &Contract) -> Vec<Diagnostic> {
    let mut v = Validator { c: contract, out: Vec::new() };
    v.names();
    v.initial_state();
    v.duplicates();
    v.types();
    v.variables();
    v.transitions();
    v.timed_transitions();
    v.reachability();
    let mut out = v.out;
    out.sort_by(|a, b| a.node_path.cmp(&b.node_path).then(a.code.cmp(b.code)).then(a.message.cmp(&b.message)));
    out.dedup();
    out
}

/// States reachable from the initial state along transition and
/// timed-transition edges, ignoring guards.
pub fn reachable_states(contract: &Contract) -> Result<BTreeSet<String>, Diagnostic> {
    let Some(initial) = contract.initial_state() else {
        let n = contract.initial_states().count();
        return Err(Diagnostic::error(
            codes::E_INITIAL_COUNT,
            "states",
            format!("expected exactly one initial state, found {n}"),
        ));
    };
    let mut edges: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let pairs = contract
        .transitions
        .iter()
        .map(|t| (t.from.as_str(), t.to.as_str()))
        .chain(contract.timed_transitions.iter().map(|t| (t.from.as_str(), t.to.as_str())));
    for (from, to) in pairs {
        edges.entry(from).or_default().push(to);
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([initial]);
    seen.insert(initial.to_string());
    while let Some(s) = queue.pop_front() {
        for &next in edges.get(s).map(Vec::as_slice).unwrap_or_default() {
            if contract.has_state(next) && seen.insert(next.to_string()) {
                queue.push_back(next);
            }
        }
    }
    Ok(seen)
}

struct Validator<'a> {
    c: &'a Contract,
    out: Vec<Diagnostic>,
}

fn definitely_non_bool(e: &SynExpr) -> bool {
    match e {
        SynExpr::Number { .. } | SynExpr::Str(_) => true,
        SynExpr::Paren(inner) => definitely_non_bool(inner),
        SynExpr::Unary(op, _) => *op != "!",
        SynExpr::Binary(op, _, _) => {
            matches!(*op, "+" | "-" | "*" | "/" | "%" | "**" | "&" | "|" | "^" | "<<" | ">>")
        }
        _ => false,
    }
}

impl<'a> Validator<'a> {
    fn err(&mut self, code: &'static str, path: impl Into<String>, msg: impl Into<String>) {
        self.out.push(Diagnostic::error(code, path, msg));
    }

    fn check_name(&mut self, name: &str, path: String) {
        if !is_valid_identifier(name) {
            self.err(codes::E_INVALID_NAME, path, format!("`{name}` is not a valid identifier"));
        }
    }

    fn names(&mut self) {
        let c = self.c;
        self.check_name(&c.name, "name".into());
        for s in &c.states {
            self.check_name(&s.name, format!("states/{}", s.name));
        }
        for s in &c.custom_types {
            self.check_name(&s.name, format!("customTypes/{}", s.name));
            for f in &s.fields {
                self.check_name(&f.name, format!("customTypes/{}/fields/{}", s.name, f.name));
            }
        }
        for v in &c.variables {
            let path = format!("variables/{}", v.name);
            self.check_name(&v.name, path.clone());
            if RESERVED.contains(&v.name.as_str()) {
                self.err(codes::E_INVALID_NAME, path, format!("`{}` is reserved by the generated code", v.name));
            }
        }
        for t in &c.transitions {
            let base = format!("transitions/{}", t.name);
            self.check_name(&t.name, base.clone());
            if RESERVED.contains(&t.name.as_str()) {
                self.err(
                    codes::E_INVALID_NAME,
                    base.clone(),
                    format!("`{}` is reserved by the generated code", t.name),
                );
            }
            for v in &t.input {
                self.check_name(&v.name, format!("{base}/input/{}", v.name));
            }
            for v in &t.output {
                self.check_name(&v.name, format!("{base}/output/{}", v.name));
            }
        }
        for t in &c.timed_transitions {
            self.check_name(&t.name, format!("timedTransitions/{}", t.name));
        }
    }

    fn initial_state(&mut self) {
        let n = self.c.initial_states().count();
        if n != 1 {
            self.err(codes::E_INITIAL_COUNT, "states", format!("expected exactly one initial state, found {n}"));
        }
    }

    fn dup_check<'n>(&mut self, names: impl Iterator<Item = &'n str>, path: impl Fn(&str) -> String, kind: &str) {
        let mut seen = BTreeSet::new();
        for n in names {
            if !seen.insert(n) {
                self.out.push(Diagnostic::error(codes::E_DUPLICATE_NAME, path(n), format!("duplicate {kind} `{n}`")));
            }
        }
    }

    fn duplicates(&mut self) {
        let c = self.c;
        self.dup_check(c.states.iter().map(|s| s.name.as_str()), |n| format!("states/{n}"), "state");
        self.dup_check(c.variables.iter().map(|s| s.name.as_str()), |n| format!("variables/{n}"), "variable");
        self.dup_check(c.custom_types.iter().map(|s| s.name.as_str()), |n| format!("customTypes/{n}"), "struct");
        self.dup_check(c.transitions.iter().map(|s| s.name.as_str()), |n| format!("transitions/{n}"), "transition");
        self.dup_check(
            c.timed_transitions.iter().map(|s| s.name.as_str()),
            |n| format!("timedTransitions/{n}"),
            "timed transition",
        );
        for s in &c.custom_types {
            let base = format!("customTypes/{}", s.name);
            self.dup_check(s.fields.iter().map(|f| f.name.as_str()), |n| format!("{base}/fields/{n}"), "field");
        }
        for t in &c.transitions {
            let base = format!("transitions/{}", t.name);
            let mut seen = BTreeSet::new();
            for (coll, v) in t.input.iter().map(|v| ("input", v)).chain(t.output.iter().map(|v| ("output", v))) {
                if !seen.insert(v.name.as_str()) {
                    self.err(
                        codes::E_DUPLICATE_NAME,
                        format!("{base}/{coll}/{}", v.name),
                        format!("duplicate parameter `{}`", v.name),
                    );
                }
            }
        }
    }

    fn check_type(&mut self, ty: &TypeRef, path: String) {
        let mut missing = Vec::new();
        ty.for_each_struct(&mut |s| {
            if self.c.struct_decl(s).is_none() {
                missing.push(s.to_string());
            }
        });
        for s in missing {
            self.err(codes::E_UNKNOWN_TYPE, path.clone(), format!("unknown type `{s}`"));
        }
        fn bad_key(ty: &TypeRef) -> Option<&TypeRef> {
            match ty {
                TypeRef::Mapping(k, v) if !k.is_value_type() => Some(k).map(|k| k.as_ref()).or(bad_key(v)),
                TypeRef::Mapping(_, v) => bad_key(v),
                TypeRef::Array(e) => bad_key(e),
                _ => None,
            }
        }
        if let Some(k) = bad_key(ty) {
            self.err(codes::E_UNSUPPORTED_TYPE, path, format!("`{k}` cannot be a mapping key"));
        }
    }

    fn types(&mut self) {
        let c = self.c;
        for s in &c.custom_types {
            if s.fields.is_empty() {
                self.err(
                    codes::E_UNSUPPORTED_TYPE,
                    format!("customTypes/{}", s.name),
                    "struct must declare at least one field",
                );
            }
            for f in &s.fields {
                self.check_type(&f.ty, format!("customTypes/{}/fields/{}", s.name, f.name));
            }
        }
        for v in &c.variables {
            self.check_type(&v.ty, format!("variables/{}/type", v.name));
        }
        for t in &c.transitions {
            for v in &t.input {
                self.check_type(&v.ty, format!("transitions/{}/input/{}/type", t.name, v.name));
            }
            for v in &t.output {
                self.check_type(&v.ty, format!("transitions/{}/output/{}/type", t.name, v.name));
            }
        }
    }

    fn check_kind(&mut self, v: &Variable, want: VarKind, path: String) {
        if v.kind != want {
            self.err(
                codes::E_VISIBILITY,
                path.clone(),
                format!("variable `{}` has kind {:?}, expected {want:?}", v.name, v.kind),
            );
        }
        let needs_vis = want == VarKind::ContractData;
        if v.visibility.is_some() != needs_vis {
            let msg =
                if needs_vis { "contract data needs a visibility" } else { "only contract data has a visibility" };
            self.err(codes::E_VISIBILITY, path, msg);
        }
    }

    fn variables(&mut self) {
        let c = self.c;
        let env = SymbolEnv::for_contract(c);
        for v in &c.variables {
            let path = format!("variables/{}", v.name);
            self.check_kind(v, VarKind::ContractData, path.clone());
            if let Some(init) = &v.initializer {
                let ipath = format!("{path}/initializer");
                if let Some((_, ty)) = self.expr(init, &env, &ipath, codes::E_UNKNOWN_SYMBOL) {
                    if ty != v.ty {
                        self.err(codes::E_TYPE, ipath, format!("initializer has type `{ty}`, variable is `{}`", v.ty));
                    }
                }
            }
        }
        for t in &c.transitions {
            for v in &t.input {
                self.check_kind(v, VarKind::InputData, format!("transitions/{}/input/{}", t.name, v.name));
            }
            for v in &t.output {
                self.check_kind(v, VarKind::OutputData, format!("transitions/{}/output/{}", t.name, v.name));
            }
        }
    }

    /// Parses and analyses an expression; returns its core type if any.
    fn expr(
        &mut self,
        e: &Expression,
        env: &SymbolEnv,
        path: &str,
        unresolved_code: &'static str,
    ) -> Option<(SynExpr, TypeRef)> {
        let syn = match parse_expr_text(e.text()) {
            Ok(s) => s,
            Err(d) => {
                self.err(codes::E_PARSE, path, d.message);
                return None;
            }
        };
        match analyze_expr(&syn, env) {
            Analysis::Core((_, ty)) => Some((syn, ty)),
            Analysis::Unresolved(name) => {
                self.err(unresolved_code, path, format!("unknown symbol `{name}`"));
                None
            }
            Analysis::IllTyped(msg) => {
                self.err(codes::E_TYPE, path, msg);
                None
            }
            Analysis::NotCore => None,
        }
    }

    fn guard(&mut self, g: &Expression, env: &SymbolEnv, path: String, unresolved_code: &'static str) {
        let syn = match parse_expr_text(g.text()) {
            Ok(s) => s,
            Err(d) => {
                self.err(codes::E_PARSE, path, d.message);
                return;
            }
        };
        match analyze_expr(&syn, env) {
            Analysis::Core((_, TypeRef::Bool)) => {}
            Analysis::Core((_, ty)) => {
                self.err(codes::E_GUARD_TYPE, path, format!("guard has type `{ty}`, expected `bool`"))
            }
            Analysis::IllTyped(msg) => self.err(codes::E_GUARD_TYPE, path, msg),
            Analysis::Unresolved(name) => self.err(unresolved_code, path, format!("unknown symbol `{name}`")),
            Analysis::NotCore => {
                if definitely_non_bool(&syn) {
                    self.err(codes::E_GUARD_TYPE, path, "guard is not a boolean expression");
                }
            }
        }
    }

    fn statements(&mut self, stmts: &[Statement], env: &SymbolEnv, base: &str, unresolved_code: &'static str) {
        let mut env = env.clone();
        for (i, s) in stmts.iter().enumerate() {
            let path = format!("{base}/statements/{i}");
            let syn = match parse_stmt_text(&s.text) {
                Ok(s) => s,
                Err(d) => {
                    self.err(codes::E_PARSE, path, d.message);
                    continue;
                }
            };
            match analyze_stmt(&syn, &env) {
                Analysis::Unresolved(name) => self.err(unresolved_code, path, format!("unknown symbol `{name}`")),
                Analysis::IllTyped(msg) => self.err(codes::E_TYPE, path, msg),
                Analysis::Core(_) | Analysis::NotCore => {}
            }
            if let SynStmt::LocalDecl { name, .. } = syn {
                env.insert_opaque(name);
            }
        }
    }

    fn transitions(&mut self) {
        let c = self.c;
        for t in &c.transitions {
            let base = format!("transitions/{}", t.name);
            for (end, state) in [("from", &t.from), ("to", &t.to)] {
                if !c.has_state(state) {
                    self.err(codes::E_UNKNOWN_STATE, format!("{base}/{end}"), format!("unknown state `{state}`"));
                }
            }
            let genv = SymbolEnv::for_guards(c, t);
            for (i, g) in t.guards.iter().enumerate() {
                self.guard(g, &genv, format!("{base}/guards/{i}"), codes::E_UNKNOWN_SYMBOL);
            }
            let senv = SymbolEnv::for_statements(c, t);
            self.statements(&t.statements, &senv, &base, codes::E_UNKNOWN_SYMBOL);
        }
    }

    fn timed_transitions(&mut self) {
        let c = self.c;
        let env = SymbolEnv::for_contract(c);
        let io: BTreeSet<&str> = c
            .transitions
            .iter()
            .flat_map(|t| t.input.iter().chain(&t.output))
            .map(|v| v.name.as_str())
            .filter(|n| env.var_type(n).is_none())
            .collect();
        // IO names are reported as E_TIMED_IO, not as unknown symbols.
        let mut io_env = env.clone();
        for n in &io {
            io_env.insert_opaque(*n);
        }
        for t in &c.timed_transitions {
            let base = format!("timedTransitions/{}", t.name);
            for (end, state) in [("from", &t.from), ("to", &t.to)] {
                if !c.has_state(state) {
                    self.err(codes::E_UNKNOWN_STATE, format!("{base}/{end}"), format!("unknown state `{state}`"));
                }
            }
            for (i, g) in t.guards.iter().enumerate() {
                let path = format!("{base}/guards/{i}");
                if let Some(name) = parse_expr_text(g.text()).ok().and_then(|e| io_use_expr(&e, &io)) {
                    self.err(
                        codes::E_TIMED_IO,
                        path.clone(),
                        format!("timed transition uses input/output data `{name}`"),
                    );
                }
                self.guard(g, &io_env, path, codes::E_UNKNOWN_SYMBOL);
            }
            for (i, s) in t.statements.iter().enumerate() {
                if let Some(name) = parse_stmt_text(&s.text).ok().and_then(|st| io_use_stmt(&st, &io)) {
                    self.err(
                        codes::E_TIMED_IO,
                        format!("{base}/statements/{i}"),
                        format!("timed transition uses input/output data `{name}`"),
                    );
                }
            }
            self.statements(&t.statements, &io_env, &base, codes::E_UNKNOWN_SYMBOL);
        }
    }

    fn reachability(&mut self) {
        let Ok(reach) = reachable_states(self.c) else { return };
        for s in &self.c.states {
            if !reach.contains(&s.name) {
                self.out.push(Diagnostic::warning(
                    codes::W_UNREACHABLE,
                    format!("states/{}", s.name),
                    format!("state `{}` is unreachable from the initial state", s.name),
                ));
            }
        }
    }
}

fn io_use_expr(e: &SynExpr, io: &BTreeSet<&str>) -> Option<String> {
    let mut hit = None;
    e.for_each_ident(&mut |n| {
        if hit.is_none() && io.contains(n) {
            hit = Some(n.to_string());
        }
    });
    hit
}

fn io_use_stmt(s: &SynStmt, io: &BTreeSet<&str>) -> Option<String> {
    let mut hit = None;
    s.for_each_ident(&mut |n| {
        if hit.is_none() && io.contains(n) {
            hit = Some(n.to_string());
        }
    });
    hit
}
