//! Solidity code generation for woven contracts, plus a mechanical check
//! that emitted text has the expected shape.

use std::fmt::Write as _;

use crate::diag::{codes, Diagnostic};
use crate::expr::TypeRef;
use crate::model::{Variable, Visibility, CREATION_TIME};
use crate::weave::{
    AdminOp, AugmentedContract, Function, ADMINS_VAR, ADMIN_COUNT_VAR, ADMIN_PARAM, COUNTER_PARAM, COUNTER_VAR,
    LOCK_VAR,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitOptions {
    pub pragma_version: String,
    pub indent: usize,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions { pragma_version: "^0.4.17".to_string(), indent: 4 }
    }
}

/// Name of the event emitted by a transition tagged `event`. It differs from
/// the function name because Solidity does not allow the two to coincide.
pub fn event_name(transition: &str) -> String {
    let mut chars = transition.chars();
    let head: String = chars.next().map(|c| c.to_ascii_uppercase()).into_iter().collect();
    format!("{head}{}Transition", chars.as_str())
}

struct Out {
    buf: String,
    unit: String,
}

impl Out {
    fn line(&mut self, depth: usize, text: impl AsRef<str>) {
        for _ in 0..depth {
            self.buf.push_str(&self.unit);
        }
        self.buf.push_str(text.as_ref());
        self.buf.push('\n');
    }

    fn blank(&mut self) {
        self.buf.push('\n');
    }
}

/// Types that a public function can take or return under the 0.4 ABI.
fn abi_encodable(ty: &TypeRef) -> bool {
    match ty {
        TypeRef::Mapping(..) | TypeRef::Struct(_) => false,
        TypeRef::Array(inner) => inner.is_value_type(),
        _ => true,
    }
}

fn check_emittable(aug: &AugmentedContract) -> Vec<Diagnostic> {
    let c = aug.base();
    let mut out = Vec::new();
    for t in &c.transitions {
        for (kind, vars) in [("input", &t.input), ("output", &t.output)] {
            for v in vars.iter().filter(|v| !abi_encodable(&v.ty)) {
                out.push(Diagnostic::error(
                    codes::E_EMIT_UNSUPPORTED,
                    format!("transitions/{}/{kind}/{}/type", t.name, v.name),
                    format!("type `{}` cannot appear in a public function signature", v.ty),
                ));
            }
        }
        if t.tags.event {
            let ev = event_name(&t.name);
            let clash = c.transition(&ev).is_some() || c.variable(&ev).is_some() || c.struct_decl(&ev).is_some();
            if clash {
                out.push(Diagnostic::error(
                    codes::E_EMIT_UNSUPPORTED,
                    format!("transitions/{}/tags", t.name),
                    format!("event name `{ev}` is already taken"),
                ));
            }
        }
    }
    out
}

/// Renders `aug` as a Solidity source file.
pub fn emit_solidity(aug: &AugmentedContract, opts: &EmitOptions) -> Result<String, Vec<Diagnostic>> {
    let errors = check_emittable(aug);
    if !errors.is_empty() {
        return Err(errors);
    }
    let c = aug.base();
    let plugins = aug.plugins();
    let mut o = Out { buf: String::new(), unit: " ".repeat(opts.indent) };
    let initial = c.initial_state().unwrap_or_default();

    o.line(0, format!("pragma solidity {};", opts.pragma_version));
    o.blank();
    o.line(0, format!("contract {} {{", c.name));

    o.line(1, "enum States {");
    let mut members: Vec<&str> = vec![initial];
    members.extend(c.states.iter().map(|s| s.name.as_str()).filter(|s| *s != initial));
    for (i, m) in members.iter().enumerate() {
        let sep = if i + 1 < members.len() { "," } else { "" };
        o.line(2, format!("{m}{sep}"));
    }
    o.line(1, "}");
    o.blank();
    o.line(1, format!("States private state = States.{initial};"));
    if !c.declares_creation_time() {
        o.line(1, format!("uint private {CREATION_TIME} = now;"));
    }

    for s in &c.custom_types {
        o.blank();
        o.line(1, format!("struct {} {{", s.name));
        for f in &s.fields {
            o.line(2, format!("{} {};", f.ty, f.name));
        }
        o.line(1, "}");
    }

    if !c.variables.is_empty() {
        o.blank();
        for v in &c.variables {
            o.line(1, declaration(v));
        }
    }

    let events: Vec<_> = c.transitions.iter().filter(|t| t.tags.event).collect();
    if !events.is_empty() {
        o.blank();
        for t in events {
            o.line(1, format!("event {}();", event_name(&t.name)));
        }
    }

    let extra = |name: &str| aug.extra_variables().iter().find(|v| v.name == name);
    if plugins.locking {
        o.blank();
        o.line(1, declaration(extra(LOCK_VAR).expect("lock variable")));
        o.line(1, "modifier locking {");
        o.line(2, format!("require(!{LOCK_VAR});"));
        o.line(2, format!("{LOCK_VAR} = true;"));
        o.line(2, "_;");
        o.line(2, format!("{LOCK_VAR} = false;"));
        o.line(1, "}");
    }
    if plugins.transition_counter {
        o.blank();
        o.line(1, declaration(extra(COUNTER_VAR).expect("counter variable")));
        o.line(1, format!("modifier transitionCounting(uint {COUNTER_PARAM}) {{"));
        o.line(2, format!("require({COUNTER_PARAM} == {COUNTER_VAR});"));
        o.line(2, format!("{COUNTER_VAR} += 1;"));
        o.line(2, "_;");
        o.line(1, "}");
    }
    if plugins.timed_transitions {
        o.blank();
        o.line(1, "modifier timedTransitions {");
        for t in aug.timed_in_firing_order() {
            let mut cond = vec![format!("state == States.{}", t.from), format!("now >= {CREATION_TIME} + {}", t.time)];
            cond.extend(t.guards.iter().map(|g| format!("({})", g.text())));
            o.line(2, format!("if ({}) {{", cond.join(" && ")));
            for s in &t.statements {
                o.line(3, format!("{};", s.text));
            }
            o.line(3, format!("state = States.{};", t.to));
            o.line(2, "}");
        }
        o.line(2, "_;");
        o.line(1, "}");
    }
    if plugins.access_control {
        o.blank();
        o.line(1, declaration(extra(ADMINS_VAR).expect("admin set")));
        o.line(1, declaration(extra(ADMIN_COUNT_VAR).expect("admin count")));
        o.line(1, "modifier onlyAdmin {");
        o.line(2, format!("require({ADMINS_VAR}[msg.sender]);"));
        o.line(2, "_;");
        o.line(1, "}");
        o.blank();
        o.line(1, format!("function {}() public {{", c.name));
        o.line(2, format!("{ADMINS_VAR}[msg.sender] = true;"));
        o.line(2, format!("{ADMIN_COUNT_VAR} = 1;"));
        o.line(1, "}");
    }

    for f in aug.functions() {
        o.blank();
        emit_function(&mut o, aug, f);
    }
    o.line(0, "}");
    Ok(o.buf)
}

fn declaration(v: &Variable) -> String {
    let vis = v.visibility.unwrap_or(Visibility::Private).keyword();
    match &v.initializer {
        Some(init) => format!("{} {vis} {} = {};", v.ty, v.name, init.text()),
        None => format!("{} {vis} {};", v.ty, v.name),
    }
}

fn function_header(aug: &AugmentedContract, f: &Function<'_>) -> String {
    let params: Vec<String> = aug.parameters(f).iter().map(|v| format!("{} {}", v.ty, v.name)).collect();
    let mut h = format!("function {}({}) public", f.name(), params.join(", "));
    if f.tags().payable {
        h.push_str(" payable");
    }
    for w in aug.wrappers_for(f.name()) {
        h.push(' ');
        h.push_str(&w.invocation());
    }
    if !f.output().is_empty() {
        let outs: Vec<String> = f.output().iter().map(|v| format!("{} {}", v.ty, v.name)).collect();
        let _ = write!(h, " returns ({})", outs.join(", "));
    }
    h.push_str(" {");
    h
}

fn emit_function(o: &mut Out, aug: &AugmentedContract, f: Function<'_>) {
    match f {
        Function::User(t) => {
            o.line(1, format!("// Transition {}", t.name));
            o.line(1, function_header(aug, &f));
            o.line(2, format!("require(state == States.{});", t.from));
            for g in &t.guards {
                o.line(2, format!("require({});", g.text()));
            }
            for s in &t.statements {
                o.line(2, format!("{};", s.text));
            }
            if t.from != t.to {
                o.line(2, format!("state = States.{};", t.to));
            }
            if t.tags.event {
                o.line(2, format!("{}();", event_name(&t.name)));
            }
            o.line(1, "}");
        }
        Function::Admin(g) => {
            o.line(1, format!("// Administrator management: {}", g.name));
            o.line(1, function_header(aug, &f));
            match g.op {
                AdminOp::Add => {
                    o.line(2, format!("if (!{ADMINS_VAR}[{ADMIN_PARAM}]) {{"));
                    o.line(3, format!("{ADMINS_VAR}[{ADMIN_PARAM}] = true;"));
                    o.line(3, format!("{ADMIN_COUNT_VAR} += 1;"));
                    o.line(2, "}");
                }
                AdminOp::Remove => {
                    o.line(2, format!("if ({ADMINS_VAR}[{ADMIN_PARAM}]) {{"));
                    o.line(3, format!("require({ADMIN_COUNT_VAR} > 1);"));
                    o.line(3, format!("{ADMINS_VAR}[{ADMIN_PARAM}] = false;"));
                    o.line(3, format!("{ADMIN_COUNT_VAR} -= 1;"));
                    o.line(2, "}");
                }
            }
            o.line(1, "}");
        }
    }
}

/// A function as recovered from emitted text.
struct ParsedFunction<'a> {
    header: &'a str,
    body: Vec<&'a str>,
}

fn find_function<'a>(lines: &[&'a str], name: &str) -> Option<ParsedFunction<'a>> {
    let prefix = format!("function {name}(");
    let start = lines.iter().position(|l| l.trim_start().starts_with(&prefix))?;
    let indent = lines[start].len() - lines[start].trim_start().len();
    let mut body = Vec::new();
    for l in &lines[start + 1..] {
        let li = l.len() - l.trim_start().len();
        if li == indent && l.trim() == "}" {
            return Some(ParsedFunction { header: lines[start].trim(), body });
        }
        body.push(l.trim());
    }
    None
}

/// Modifier names in the order they appear in a function header.
fn header_modifiers(header: &str) -> Vec<String> {
    let Some(close) = header.find(')') else { return Vec::new() };
    let rest = header[close + 1..].split(" returns ").next().unwrap_or("");
    let rest = rest.trim_end_matches('{');
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut word = String::new();
    for ch in rest.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if depth == 0 && (c.is_ascii_alphanumeric() || c == '_') => word.push(c),
            _ if depth == 0 && !word.is_empty() => out.push(std::mem::take(&mut word)),
            _ => {}
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out.retain(|w| !matches!(w.as_str(), "public" | "payable" | "external" | "internal" | "private"));
    out
}

/// Checks emitted text against the layout `emit_solidity` promises:
/// pragma first, an enum with one member per state (initial first), one
/// function per transition whose first body line is the state check and
/// whose modifiers follow wrapper order, and a state write exactly when the
/// transition changes state.
pub fn structural_check(solidity: &str, aug: &AugmentedContract) -> Vec<Diagnostic> {
    let c = aug.base();
    let mut out = Vec::new();
    let lines: Vec<&str> = solidity.lines().collect();

    let first = lines.iter().find(|l| !l.trim().is_empty()).map(|l| l.trim());
    if !first.is_some_and(|l| l.starts_with("pragma solidity ") && l.ends_with(';')) {
        out.push(Diagnostic::error(codes::E_STRUCT_PRAGMA, "name", "output does not start with a pragma line"));
    }

    let members = lines.iter().position(|l| l.trim() == "enum States {").map(|start| {
        lines[start + 1..]
            .iter()
            .take_while(|l| l.trim() != "}")
            .map(|l| l.trim().trim_end_matches(','))
            .collect::<Vec<_>>()
    });
    match members {
        None => out.push(Diagnostic::error(codes::E_STRUCT_ENUM, "states", "missing `enum States`")),
        Some(m) => {
            let mut expected: Vec<&str> = c.initial_state().into_iter().collect();
            expected.extend(c.states.iter().filter(|s| !s.is_initial).map(|s| s.name.as_str()));
            if m != expected {
                out.push(Diagnostic::error(
                    codes::E_STRUCT_ENUM,
                    "states",
                    format!("enum members {m:?} do not match states {expected:?}"),
                ));
            }
        }
    }

    for f in aug.functions() {
        let (path, is_user) = match f {
            Function::User(t) => (format!("transitions/{}", t.name), true),
            Function::Admin(g) => (format!("generatedTransitions/{}", g.name), false),
        };
        let Some(pf) = find_function(&lines, f.name()) else {
            out.push(Diagnostic::error(
                codes::E_STRUCT_FUNCTION,
                path,
                format!("no function emitted for `{}`", f.name()),
            ));
            continue;
        };
        let expected: Vec<&str> = aug.wrappers_for(f.name()).iter().map(|w| w.modifier_name()).collect();
        let found = header_modifiers(pf.header);
        if found != expected {
            out.push(Diagnostic::error(
                codes::E_STRUCT_MODIFIER_ORDER,
                path.clone(),
                format!("modifiers {found:?}, expected {expected:?}"),
            ));
        }
        if f.tags().payable != pf.header.contains(" payable") {
            out.push(Diagnostic::error(codes::E_STRUCT_FUNCTION, path.clone(), "payable keyword mismatch"));
        }
        if let Function::User(t) = f {
            let require = format!("require(state == States.{});", t.from);
            if pf.body.first() != Some(&require.as_str()) {
                out.push(Diagnostic::error(
                    codes::E_STRUCT_STATE_REQUIRE,
                    path.clone(),
                    format!("first statement of `{}` is not `{require}`", t.name),
                ));
            }
            let writes: Vec<&&str> = pf.body.iter().filter(|l| l.starts_with("state = States.")).collect();
            let expected_write = format!("state = States.{};", t.to);
            let ok = if t.from == t.to { writes.is_empty() } else { writes == [&expected_write.as_str()] };
            if !ok {
                out.push(Diagnostic::error(
                    codes::E_STRUCT_STATE_WRITE,
                    path,
                    format!("unexpected state writes {writes:?} in `{}`", t.name),
                ));
            }
        } else if !is_user && pf.body.iter().any(|l| l.starts_with("require(state ==")) {
            out.push(Diagnostic::error(
                codes::E_STRUCT_STATE_REQUIRE,
                path,
                "administrator management must not depend on the state",
            ));
        }
    }
    out
}
