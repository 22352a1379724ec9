//! Two-tier classification: decides whether a syntactically valid snippet
//! falls inside the interpretable core, and builds its typed tree if so.

use std::collections::{BTreeMap, BTreeSet};

use primitive_types::U256;

use super::syntax::{CallArgs, SynExpr, SynStmt};
use crate::expr::{Address, BinaryOp, CoreExpr, Expression, Statement, StatementKind, TypeRef, UnaryOp};
use crate::model::{Contract, Transition, VarKind, CREATION_TIME};

/// Names in scope for a snippet.
#[derive(Debug, Clone, Default)]
pub struct SymbolEnv {
    vars: BTreeMap<String, TypeRef>,
    /// Resolvable names the interpreter cannot model (local declarations).
    opaque: BTreeSet<String>,
    structs: BTreeMap<String, Vec<(String, TypeRef)>>,
}

impl SymbolEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_var(mut self, name: impl Into<String>, ty: TypeRef) -> Self {
        self.insert_var(name, ty);
        self
    }

    pub fn with_struct(mut self, name: impl Into<String>, fields: Vec<(String, TypeRef)>) -> Self {
        self.structs.insert(name.into(), fields);
        self
    }

    pub fn insert_var(&mut self, name: impl Into<String>, ty: TypeRef) {
        let name = name.into();
        self.opaque.remove(&name);
        self.vars.insert(name, ty);
    }

    pub fn insert_opaque(&mut self, name: impl Into<String>) {
        let name = name.into();
        self.vars.remove(&name);
        self.opaque.insert(name);
    }

    pub fn var_type(&self, name: &str) -> Option<&TypeRef> {
        self.vars.get(name)
    }

    pub fn knows(&self, name: &str) -> bool {
        self.vars.contains_key(name) || self.opaque.contains(name) || self.structs.contains_key(name)
    }

    /// Contract data (including the implicit `creationTime`) and structs.
    pub fn for_contract(contract: &Contract) -> Self {
        let mut env = SymbolEnv::new();
        env.insert_var(CREATION_TIME, TypeRef::Uint);
        for s in &contract.custom_types {
            env.structs.insert(s.name.clone(), s.fields.iter().map(|f| (f.name.clone(), f.ty.clone())).collect());
        }
        for v in contract.variables.iter().filter(|v| v.kind == VarKind::ContractData) {
            env.insert_var(v.name.clone(), v.ty.clone());
        }
        env
    }

    /// Guards see contract data and the transition's inputs.
    pub fn for_guards(contract: &Contract, t: &Transition) -> Self {
        let mut env = Self::for_contract(contract);
        for v in &t.input {
            env.insert_var(v.name.clone(), v.ty.clone());
        }
        env
    }

    /// Statements additionally see the transition's outputs.
    pub fn for_statements(contract: &Contract, t: &Transition) -> Self {
        let mut env = Self::for_guards(contract, t);
        for v in &t.output {
            env.insert_var(v.name.clone(), v.ty.clone());
        }
        env
    }

    fn struct_fields(&self, name: &str) -> Option<&[(String, TypeRef)]> {
        self.structs.get(name).map(Vec::as_slice)
    }

    /// Whether values of `ty` can be represented by the interpreter.
    fn interpretable(&self, ty: &TypeRef) -> bool {
        self.interpretable_at(ty, 0)
    }

    fn interpretable_at(&self, ty: &TypeRef, depth: usize) -> bool {
        if depth > 16 {
            return false;
        }
        match ty {
            TypeRef::Uint | TypeRef::Bool | TypeRef::Address | TypeRef::Bytes32 => true,
            TypeRef::Int | TypeRef::String => false,
            TypeRef::Mapping(k, v) => {
                k.is_value_type() && self.interpretable_at(k, depth + 1) && self.interpretable_at(v, depth + 1)
            }
            TypeRef::Array(e) => self.interpretable_at(e, depth + 1),
            TypeRef::Struct(s) => match self.struct_fields(s) {
                Some(fields) => fields.iter().all(|(_, t)| self.interpretable_at(t, depth + 1)),
                None => false,
            },
        }
    }
}

/// Solidity globals and builtins: known names that are outside the core.
pub const SOLIDITY_BUILTINS: &[&str] = &[
    "this",
    "block",
    "tx",
    "msg",
    "now",
    "keccak256",
    "sha3",
    "sha256",
    "ripemd160",
    "ecrecover",
    "require",
    "assert",
    "revert",
    "addmod",
    "mulmod",
    "selfdestruct",
    "suicide",
    "gasleft",
    "blockhash",
    "address",
    "uint",
    "int",
    "bool",
    "bytes32",
    "string",
    "bytes",
    "byte",
    "super",
];

pub fn is_builtin(name: &str) -> bool {
    SOLIDITY_BUILTINS.contains(&name)
        || ["uint", "int", "bytes"]
            .iter()
            .any(|p| name.strip_prefix(p).is_some_and(|r| !r.is_empty() && r.chars().all(|c| c.is_ascii_digit())))
}

/// Outcome of analysing a snippet against an environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Analysis<T> {
    Core(T),
    /// Uses a construct outside the interpretable core.
    NotCore,
    /// Core-shaped but names an identifier absent from the environment.
    Unresolved(String),
    /// Core-shaped and resolved, but ill-typed.
    IllTyped(String),
}

fn duration_factor(unit: &str) -> Option<u64> {
    Some(match unit {
        "seconds" => 1,
        "minutes" => 60,
        "hours" => 3_600,
        "days" => 86_400,
        _ => return None,
    })
}

fn core_shaped(e: &SynExpr) -> bool {
    match e {
        SynExpr::Number { unit, .. } => unit.as_deref().is_none_or(|u| duration_factor(u).is_some()),
        SynExpr::Str(_) | SynExpr::Ternary(..) => false,
        SynExpr::Bool(_) => true,
        SynExpr::Ident(name) => name == "now" || !is_builtin(name),
        SynExpr::Paren(inner) => core_shaped(inner),
        SynExpr::Member(base, field) => match base.as_ref() {
            SynExpr::Ident(b) if b == "msg" => field == "sender" || field == "value",
            _ => core_shaped(base),
        },
        SynExpr::Index(a, b) => core_shaped(a) && core_shaped(b),
        SynExpr::Call(callee, CallArgs::Named(args)) => match callee.as_ref() {
            SynExpr::Ident(name) if !is_builtin(name) => args.iter().all(|(_, a)| core_shaped(a)),
            _ => false,
        },
        SynExpr::Call(..) => false,
        SynExpr::Unary(op, inner) => (*op == "!" || *op == "-") && core_shaped(inner),
        SynExpr::Binary(op, a, b) => BinaryOp::from_symbol(op).is_some() && core_shaped(a) && core_shaped(b),
    }
}

fn first_unresolved(e: &SynExpr, env: &SymbolEnv) -> Option<String> {
    let mut missing = None;
    e.for_each_ident(&mut |name| {
        if missing.is_none() && name != "now" && name != "msg" && !env.knows(name) {
            missing = Some(name.to_string());
        }
    });
    missing
}

enum TypeFail {
    NotCore,
    Ill(String),
}

type Typed = Result<(CoreExpr, TypeRef), TypeFail>;

fn ill<T>(msg: impl Into<String>) -> Result<T, TypeFail> {
    Err(TypeFail::Ill(msg.into()))
}

pub(crate) fn parse_number(lexeme: &str) -> Option<U256> {
    match lexeme.strip_prefix("0x").or_else(|| lexeme.strip_prefix("0X")) {
        Some(hex) => U256::from_str_radix(hex, 16).ok(),
        None => U256::from_dec_str(lexeme).ok(),
    }
}

fn type_expr(e: &SynExpr, env: &SymbolEnv) -> Typed {
    match e {
        SynExpr::Number { lexeme, unit } => {
            let is_hex = lexeme.starts_with("0x") || lexeme.starts_with("0X");
            if is_hex && lexeme.len() == 42 && unit.is_none() {
                return Ok((CoreExpr::Address(Address::new(lexeme.to_ascii_lowercase())), TypeRef::Address));
            }
            let Some(mut n) = parse_number(lexeme) else { return ill(format!("literal `{lexeme}` exceeds 256 bits")) };
            if let Some(u) = unit {
                let factor = duration_factor(u).ok_or(TypeFail::NotCore)?;
                n = match n.checked_mul(U256::from(factor)) {
                    Some(v) => v,
                    None => return ill(format!("duration `{lexeme} {u}` exceeds 256 bits")),
                };
            }
            Ok((CoreExpr::Uint(n), TypeRef::Uint))
        }
        SynExpr::Bool(b) => Ok((CoreExpr::Bool(*b), TypeRef::Bool)),
        SynExpr::Ident(name) if name == "now" => Ok((CoreExpr::Now, TypeRef::Uint)),
        SynExpr::Ident(name) => match env.var_type(name) {
            Some(ty) if env.interpretable(ty) => Ok((CoreExpr::Var(name.clone()), ty.clone())),
            _ => Err(TypeFail::NotCore),
        },
        SynExpr::Paren(inner) => type_expr(inner, env),
        SynExpr::Member(base, field) => {
            if matches!(base.as_ref(), SynExpr::Ident(b) if b == "msg") {
                return match field.as_str() {
                    "sender" => Ok((CoreExpr::MsgSender, TypeRef::Address)),
                    "value" => Ok((CoreExpr::MsgValue, TypeRef::Uint)),
                    _ => Err(TypeFail::NotCore),
                };
            }
            let (b, bt) = type_expr(base, env)?;
            match bt {
                TypeRef::Struct(s) => {
                    let fields = env.struct_fields(&s).ok_or(TypeFail::NotCore)?;
                    match fields.iter().find(|(n, _)| n == field) {
                        Some((_, ft)) => Ok((CoreExpr::Member(Box::new(b), field.clone()), ft.clone())),
                        None => ill(format!("struct `{s}` has no field `{field}`")),
                    }
                }
                TypeRef::Array(_) if field == "length" => Ok((CoreExpr::Length(Box::new(b)), TypeRef::Uint)),
                other => ill(format!("type `{other}` has no member `{field}`")),
            }
        }
        SynExpr::Index(base, key) => {
            let (b, bt) = type_expr(base, env)?;
            let (k, kt) = type_expr(key, env)?;
            match bt {
                TypeRef::Mapping(want, vt) if *want == kt => Ok((CoreExpr::Index(Box::new(b), Box::new(k)), *vt)),
                TypeRef::Mapping(want, _) => ill(format!("mapping key must be `{want}`, found `{kt}`")),
                TypeRef::Array(et) if kt == TypeRef::Uint => Ok((CoreExpr::Index(Box::new(b), Box::new(k)), *et)),
                TypeRef::Array(_) => ill(format!("array index must be `uint`, found `{kt}`")),
                other => ill(format!("type `{other}` is not indexable")),
            }
        }
        SynExpr::Call(callee, CallArgs::Named(args)) => {
            let SynExpr::Ident(name) = callee.as_ref() else { return Err(TypeFail::NotCore) };
            let Some(fields) = env.struct_fields(name) else { return Err(TypeFail::NotCore) };
            if !env.interpretable(&TypeRef::Struct(name.clone())) {
                return Err(TypeFail::NotCore);
            }
            if args.len() != fields.len() {
                return ill(format!("struct `{name}` literal must set all {} fields", fields.len()));
            }
            let mut out = Vec::with_capacity(args.len());
            for (fname, fexpr) in args {
                let Some((_, fty)) = fields.iter().find(|(n, _)| n == fname) else {
                    return ill(format!("struct `{name}` has no field `{fname}`"));
                };
                if out.iter().any(|(n, _): &(String, CoreExpr)| n == fname) {
                    return ill(format!("field `{fname}` set twice"));
                }
                let (fe, ft) = type_expr(fexpr, env)?;
                if ft != *fty {
                    return ill(format!("field `{fname}` expects `{fty}`, found `{ft}`"));
                }
                out.push((fname.clone(), fe));
            }
            Ok((CoreExpr::StructLit { name: name.clone(), fields: out }, TypeRef::Struct(name.clone())))
        }
        SynExpr::Unary(op, inner) => {
            let (ie, it) = type_expr(inner, env)?;
            match (*op, &it) {
                ("!", TypeRef::Bool) => Ok((CoreExpr::Unary(UnaryOp::Not, Box::new(ie)), TypeRef::Bool)),
                ("-", TypeRef::Uint) => Ok((CoreExpr::Unary(UnaryOp::Neg, Box::new(ie)), TypeRef::Uint)),
                _ => ill(format!("operator `{op}` not applicable to `{it}`")),
            }
        }
        SynExpr::Binary(op, a, b) => {
            let bop = BinaryOp::from_symbol(op).ok_or(TypeFail::NotCore)?;
            let (ae, at) = type_expr(a, env)?;
            let (be, bt) = type_expr(b, env)?;
            let result = match bop {
                BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul if at == TypeRef::Uint && bt == TypeRef::Uint => {
                    TypeRef::Uint
                }
                BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
                    if at == TypeRef::Uint && bt == TypeRef::Uint =>
                {
                    TypeRef::Bool
                }
                BinaryOp::Eq | BinaryOp::Ne if at == bt && at.is_value_type() => TypeRef::Bool,
                BinaryOp::And | BinaryOp::Or if at == TypeRef::Bool && bt == TypeRef::Bool => TypeRef::Bool,
                _ => return ill(format!("operator `{op}` not applicable to `{at}` and `{bt}`")),
            };
            Ok((CoreExpr::Binary(bop, Box::new(ae), Box::new(be)), result))
        }
        SynExpr::Str(_) | SynExpr::Call(..) | SynExpr::Ternary(..) => Err(TypeFail::NotCore),
    }
}

/// Analyses an expression: core with its type, or why it is not.
pub fn analyze_expr(e: &SynExpr, env: &SymbolEnv) -> Analysis<(CoreExpr, TypeRef)> {
    if !core_shaped(e) {
        return Analysis::NotCore;
    }
    if let Some(name) = first_unresolved(e, env) {
        return Analysis::Unresolved(name);
    }
    match type_expr(e, env) {
        Ok(t) => Analysis::Core(t),
        Err(TypeFail::NotCore) => Analysis::NotCore,
        Err(TypeFail::Ill(msg)) => Analysis::IllTyped(msg),
    }
}

/// Builds a core statement from its typed parts, or explains why it is ill-typed.
type StatementBuilder = fn(Vec<(CoreExpr, TypeRef)>) -> Result<StatementKind, String>;

/// Analyses a statement against the three interpretable statement forms.
pub fn analyze_stmt(s: &SynStmt, env: &SymbolEnv) -> Analysis<StatementKind> {
    let (parts, build): (Vec<&SynExpr>, StatementBuilder) = match s {
        SynStmt::Assign { target, op: "=", value } => (vec![target, value], |mut v| {
            let (value, vt) = v.pop().expect("two parts");
            let (target, tt) = v.pop().expect("two parts");
            if target.root_var().is_none() {
                return Err("assignment target is not a variable".into());
            }
            if matches!(tt, TypeRef::Mapping(..)) {
                return Err("mappings cannot be assigned as a whole".into());
            }
            if tt != vt {
                return Err(format!("cannot assign `{vt}` to `{tt}`"));
            }
            Ok(StatementKind::Assign { target, value })
        }),
        SynStmt::Expr(SynExpr::Call(callee, CallArgs::Positional(args))) if args.len() == 1 => match callee.as_ref() {
            SynExpr::Member(base, m) if m == "push" => (vec![base, &args[0]], |mut v| {
                let (value, vt) = v.pop().expect("two parts");
                let (target, tt) = v.pop().expect("two parts");
                match tt {
                    TypeRef::Array(et) if *et == vt => Ok(StatementKind::MappingPush { target, value }),
                    TypeRef::Array(et) => Err(format!("cannot push `{vt}` onto `{et}[]`")),
                    other => Err(format!("`push` on non-array `{other}`")),
                }
            }),
            SynExpr::Member(base, m) if m == "transfer" => (vec![base, &args[0]], |mut v| {
                let (amount, at) = v.pop().expect("two parts");
                let (recipient, rt) = v.pop().expect("two parts");
                if rt != TypeRef::Address {
                    return Err(format!("`transfer` on non-address `{rt}`"));
                }
                if at != TypeRef::Uint {
                    return Err(format!("`transfer` amount must be `uint`, found `{at}`"));
                }
                Ok(StatementKind::Send { recipient, amount })
            }),
            _ => return Analysis::NotCore,
        },
        _ => return Analysis::NotCore,
    };
    if !parts.iter().all(|p| core_shaped(p)) {
        return Analysis::NotCore;
    }
    if let Some(name) = parts.iter().find_map(|p| first_unresolved(p, env)) {
        return Analysis::Unresolved(name);
    }
    let mut typed = Vec::with_capacity(parts.len());
    for p in parts {
        match type_expr(p, env) {
            Ok(t) => typed.push(t),
            Err(TypeFail::NotCore) => return Analysis::NotCore,
            Err(TypeFail::Ill(msg)) => return Analysis::IllTyped(msg),
        }
    }
    match build(typed) {
        Ok(kind) => Analysis::Core(kind),
        Err(msg) => Analysis::IllTyped(msg),
    }
}

pub fn expression_from_syn(e: &SynExpr, env: &SymbolEnv) -> Expression {
    let text = e.to_string();
    match analyze_expr(e, env) {
        Analysis::Core((ast, _)) => Expression::Core { text, ast },
        _ => Expression::Opaque { text },
    }
}

pub fn statement_from_syn(s: &SynStmt, env: &SymbolEnv) -> Statement {
    let kind = match analyze_stmt(s, env) {
        Analysis::Core(k) => k,
        _ => StatementKind::Opaque,
    };
    Statement { text: s.to_string(), kind }
}

/// Statement list with local declarations scoped to later statements.
pub fn statements_from_syn(stmts: &[SynStmt], env: &SymbolEnv) -> Vec<Statement> {
    let mut env = env.clone();
    stmts
        .iter()
        .map(|s| {
            let out = statement_from_syn(s, &env);
            if let SynStmt::LocalDecl { name, .. } = s {
                env.insert_opaque(name.clone());
            }
            out
        })
        .collect()
}
