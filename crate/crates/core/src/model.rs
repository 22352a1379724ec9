//! The contract-as-state-machine model.

use crate::expr::{Expression, Statement, TypeRef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub name: String,
    pub states: Vec<StateDecl>,
    pub variables: Vec<Variable>,
    pub custom_types: Vec<StructDecl>,
    pub transitions: Vec<Transition>,
    pub timed_transitions: Vec<TimedTransition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub is_initial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    ContractData,
    InputData,
    OutputData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Visibility {
    Public,
    Private,
}

impl Visibility {
    pub fn keyword(self) -> &'static str {
        match self {
            Visibility::Public => "public",
            Visibility::Private => "private",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub ty: TypeRef,
    /// Present iff `kind` is [`VarKind::ContractData`].
    pub visibility: Option<Visibility>,
    pub initializer: Option<Expression>,
}

impl Variable {
    pub fn contract(name: impl Into<String>, ty: TypeRef, visibility: Visibility) -> Self {
        Variable { name: name.into(), kind: VarKind::ContractData, ty, visibility: Some(visibility), initializer: None }
    }

    pub fn input(name: impl Into<String>, ty: TypeRef) -> Self {
        Variable { name: name.into(), kind: VarKind::InputData, ty, visibility: None, initializer: None }
    }

    pub fn output(name: impl Into<String>, ty: TypeRef) -> Self {
        Variable { name: name.into(), kind: VarKind::OutputData, ty, visibility: None, initializer: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructField {
    pub name: String,
    pub ty: TypeRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructDecl {
    pub name: String,
    pub fields: Vec<StructField>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Tags {
    pub payable: bool,
    pub admin: bool,
    pub event: bool,
}

impl Tags {
    pub fn is_empty(&self) -> bool {
        !(self.payable || self.admin || self.event)
    }

    /// Tag keywords in canonical order.
    pub fn names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.payable {
            out.push("payable");
        }
        if self.admin {
            out.push("admin");
        }
        if self.event {
            out.push("event");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub from: String,
    pub to: String,
    pub guards: Vec<Expression>,
    pub input: Vec<Variable>,
    pub output: Vec<Variable>,
    pub statements: Vec<Statement>,
    pub tags: Tags,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedTransition {
    pub name: String,
    pub from: String,
    pub to: String,
    pub guards: Vec<Expression>,
    pub statements: Vec<Statement>,
    /// Seconds after contract creation at which the transition becomes due.
    pub time: u64,
}

impl Contract {
    pub fn initial_states(&self) -> impl Iterator<Item = &StateDecl> {
        self.states.iter().filter(|s| s.is_initial)
    }

    /// The initial state, if exactly one is declared.
    pub fn initial_state(&self) -> Option<&str> {
        let mut it = self.initial_states();
        match (it.next(), it.next()) {
            (Some(s), None) => Some(&s.name),
            _ => None,
        }
    }

    pub fn has_state(&self, name: &str) -> bool {
        self.states.iter().any(|s| s.name == name)
    }

    pub fn transition(&self, name: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn struct_decl(&self, name: &str) -> Option<&StructDecl> {
        self.custom_types.iter().find(|s| s.name == name)
    }

    /// Whether the user declared `creationTime` explicitly.
    pub fn declares_creation_time(&self) -> bool {
        self.variable(CREATION_TIME).is_some()
    }

    /// Whether `path` names an existing node of this contract.
    pub fn resolves(&self, path: &str) -> bool {
        let segs: Vec<&str> = path.split('/').collect();
        match segs.as_slice() {
            ["name"] | ["states"] | ["variables"] | ["customTypes"] | ["transitions"] | ["timedTransitions"] => true,
            ["states", s] => self.has_state(s),
            ["variables", v] => self.variable(v).is_some(),
            ["variables", v, "initializer"] => self.variable(v).is_some_and(|v| v.initializer.is_some()),
            ["variables", v, "type"] => self.variable(v).is_some(),
            ["customTypes", s] => self.struct_decl(s).is_some(),
            ["customTypes", s, "fields", f] => {
                self.struct_decl(s).is_some_and(|s| s.fields.iter().any(|x| x.name == *f))
            }
            ["transitions", t, rest @ ..] => match self.transition(t) {
                Some(t) => resolve_transition_tail(t, rest),
                None => false,
            },
            ["timedTransitions", t, rest @ ..] => match self.timed_transitions.iter().find(|x| x.name == *t) {
                Some(t) => resolve_timed_tail(t, rest),
                None => false,
            },
            _ => false,
        }
    }
}

fn index_in(seg: &str, len: usize) -> bool {
    seg.parse::<usize>().is_ok_and(|i| i < len)
}

fn resolve_transition_tail(t: &Transition, rest: &[&str]) -> bool {
    match rest {
        [] | ["from"] | ["to"] | ["tags"] | ["guards"] | ["statements"] | ["input"] | ["output"] => true,
        ["guards", i] => index_in(i, t.guards.len()),
        ["statements", i] => index_in(i, t.statements.len()),
        ["input", v] => t.input.iter().any(|x| x.name == *v),
        ["output", v] => t.output.iter().any(|x| x.name == *v),
        ["input", v, "type"] => t.input.iter().any(|x| x.name == *v),
        ["output", v, "type"] => t.output.iter().any(|x| x.name == *v),
        _ => false,
    }
}

fn resolve_timed_tail(t: &TimedTransition, rest: &[&str]) -> bool {
    match rest {
        [] | ["from"] | ["to"] | ["time"] | ["guards"] | ["statements"] => true,
        ["guards", i] => index_in(i, t.guards.len()),
        ["statements", i] => index_in(i, t.statements.len()),
        _ => false,
    }
}

/// Name of the creation timestamp every emitted contract carries.
pub const CREATION_TIME: &str = "creationTime";

pub fn is_valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
