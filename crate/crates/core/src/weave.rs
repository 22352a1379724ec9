//! Plugin weaving: enriches a validated contract with locking, transition
//! counting, automatic timed transitions and access control.
//!
//! Weaving never touches the base contract. The result is a distinct type,
//! so a woven contract cannot be woven a second time.

use std::fmt;
use std::str::FromStr;

use crate::diag::{codes, has_errors, Diagnostic};
use crate::expr::{Expression, Statement, TypeRef};
use crate::model::{Contract, Tags, TimedTransition, Transition, Variable, Visibility};
use crate::validate::validate;

pub const LOCK_VAR: &str = "locked";
pub const COUNTER_VAR: &str = "transitionCounter";
pub const COUNTER_PARAM: &str = "nextTransitionNumber";
pub const ADMINS_VAR: &str = "admins";
pub const ADMIN_COUNT_VAR: &str = "adminCount";
pub const ADMIN_PARAM: &str = "admin";
pub const ADD_ADMIN: &str = "addAdmin";
pub const REMOVE_ADMIN: &str = "removeAdmin";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PluginSet {
    pub locking: bool,
    pub transition_counter: bool,
    pub timed_transitions: bool,
    pub access_control: bool,
}

impl PluginSet {
    pub const NONE: PluginSet =
        PluginSet { locking: false, transition_counter: false, timed_transitions: false, access_control: false };

    /// All 16 combinations, in binary counting order
    /// (locking is the lowest bit, access control the highest).
    pub fn all() -> impl Iterator<Item = PluginSet> {
        (0u8..16).map(|bits| PluginSet {
            locking: bits & 1 != 0,
            transition_counter: bits & 2 != 0,
            timed_transitions: bits & 4 != 0,
            access_control: bits & 8 != 0,
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.locking {
            v.push("locking");
        }
        if self.transition_counter {
            v.push("counter");
        }
        if self.timed_transitions {
            v.push("timed");
        }
        if self.access_control {
            v.push("access");
        }
        v
    }

    /// `none` or the enabled names joined with `+`, e.g. `locking+counter`.
    pub fn label(&self) -> String {
        let names = self.names();
        if names.is_empty() {
            "none".to_string()
        } else {
            names.join("+")
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == PluginSet::NONE
    }
}

impl fmt::Display for PluginSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown plugin `{0}` (expected locking, counter, timed or access)")]
pub struct UnknownPlugin(pub String);

impl FromStr for PluginSet {
    type Err = UnknownPlugin;

    /// Parses a comma-separated list such as `locking,counter`. Empty input
    /// and `none` both mean no plugins.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = PluginSet::NONE;
        for name in s.split([',', '+']).map(str::trim).filter(|n| !n.is_empty()) {
            match name {
                "locking" => set.locking = true,
                "counter" => set.transition_counter = true,
                "timed" => set.timed_transitions = true,
                "access" => set.access_control = true,
                "none" => {}
                other => return Err(UnknownPlugin(other.to_string())),
            }
        }
        Ok(set)
    }
}

/// Plugin code wrapped around a transition body, outermost first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Wrapper {
    Locking,
    TransitionCounting,
    TimedTransitions,
    AccessGuard,
}

impl Wrapper {
    pub fn modifier_name(self) -> &'static str {
        match self {
            Wrapper::Locking => "locking",
            Wrapper::TransitionCounting => "transitionCounting",
            Wrapper::TimedTransitions => "timedTransitions",
            Wrapper::AccessGuard => "onlyAdmin",
        }
    }

    /// How the modifier is applied in a function header.
    pub fn invocation(self) -> String {
        match self {
            Wrapper::TransitionCounting => format!("transitionCounting({COUNTER_PARAM})"),
            w => w.modifier_name().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdminOp {
    Add,
    Remove,
}

/// Administrator management function added by the access-control plugin.
/// These are state-independent: they carry no state precondition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedTransition {
    pub name: String,
    pub op: AdminOp,
    pub input: Variable,
    pub tags: Tags,
}

/// A function of the woven contract: a user transition or a generated one.
#[derive(Debug, Clone, Copy)]
pub enum Function<'a> {
    User(&'a Transition),
    Admin(&'a GeneratedTransition),
}

impl<'a> Function<'a> {
    pub fn name(&self) -> &'a str {
        match self {
            Function::User(t) => &t.name,
            Function::Admin(g) => &g.name,
        }
    }

    pub fn tags(&self) -> Tags {
        match self {
            Function::User(t) => t.tags,
            Function::Admin(g) => g.tags,
        }
    }

    pub fn input(&self) -> &'a [Variable] {
        match self {
            Function::User(t) => &t.input,
            Function::Admin(g) => std::slice::from_ref(&g.input),
        }
    }

    pub fn output(&self) -> &'a [Variable] {
        match self {
            Function::User(t) => &t.output,
            Function::Admin(_) => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedContract {
    base: Contract,
    plugins: PluginSet,
    extra_variables: Vec<Variable>,
    wrappers: Vec<(String, Vec<Wrapper>)>,
    extra_inputs: Vec<(String, Vec<Variable>)>,
    generated: Vec<GeneratedTransition>,
}

impl AugmentedContract {
    pub fn base(&self) -> &Contract {
        &self.base
    }

    pub fn plugins(&self) -> PluginSet {
        self.plugins
    }

    pub fn extra_variables(&self) -> &[Variable] {
        &self.extra_variables
    }

    /// Per-function wrapper lists in function order.
    pub fn wrappers(&self) -> &[(String, Vec<Wrapper>)] {
        &self.wrappers
    }

    pub fn wrappers_for(&self, function: &str) -> &[Wrapper] {
        self.wrappers.iter().find(|(n, _)| n == function).map(|(_, w)| w.as_slice()).unwrap_or_default()
    }

    pub fn extra_inputs(&self) -> &[(String, Vec<Variable>)] {
        &self.extra_inputs
    }

    pub fn extra_inputs_for(&self, function: &str) -> &[Variable] {
        self.extra_inputs.iter().find(|(n, _)| n == function).map(|(_, v)| v.as_slice()).unwrap_or_default()
    }

    pub fn generated_transitions(&self) -> &[GeneratedTransition] {
        &self.generated
    }

    /// User transitions in declaration order, then generated ones.
    pub fn functions(&self) -> impl Iterator<Item = Function<'_>> {
        self.base.transitions.iter().map(Function::User).chain(self.generated.iter().map(Function::Admin))
    }

    pub fn function(&self, name: &str) -> Option<Function<'_>> {
        self.functions().find(|f| f.name() == name)
    }

    /// Timed transitions in firing order: ascending time, ties by declaration.
    pub fn timed_in_firing_order(&self) -> Vec<&TimedTransition> {
        let mut v: Vec<&TimedTransition> = self.base.timed_transitions.iter().collect();
        v.sort_by_key(|t| t.time);
        v
    }

    /// Full parameter list: declared inputs followed by plugin inputs.
    pub fn parameters<'a>(&'a self, f: &Function<'a>) -> Vec<&'a Variable> {
        f.input().iter().chain(self.extra_inputs_for(f.name())).collect()
    }
}

fn conflict(path: String, what: &str, plugin: &str) -> Diagnostic {
    Diagnostic::error(
        codes::E_PLUGIN_CONFLICT,
        path,
        format!("`{what}` collides with a name introduced by the {plugin} plugin"),
    )
}

fn check_plugin_names(c: &Contract, plugins: PluginSet) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut reserved_vars: Vec<(&str, &str)> = Vec::new();
    let mut reserved_fns: Vec<(&str, &str)> = Vec::new();
    let mut reserved_params: Vec<(&str, &str)> = Vec::new();
    if plugins.locking {
        reserved_vars.push((LOCK_VAR, "locking"));
        reserved_fns.push((Wrapper::Locking.modifier_name(), "locking"));
    }
    if plugins.transition_counter {
        reserved_vars.push((COUNTER_VAR, "transition counter"));
        reserved_fns.push((Wrapper::TransitionCounting.modifier_name(), "transition counter"));
        reserved_params.push((COUNTER_PARAM, "transition counter"));
    }
    if plugins.timed_transitions {
        reserved_fns.push((Wrapper::TimedTransitions.modifier_name(), "timed transitions"));
    }
    if plugins.access_control {
        reserved_vars.push((ADMINS_VAR, "access control"));
        reserved_vars.push((ADMIN_COUNT_VAR, "access control"));
        reserved_fns.push((Wrapper::AccessGuard.modifier_name(), "access control"));
        reserved_fns.push((ADD_ADMIN, "access control"));
        reserved_fns.push((REMOVE_ADMIN, "access control"));
    }
    let all_names = reserved_vars.iter().chain(&reserved_fns);
    for (name, plugin) in all_names {
        if c.variable(name).is_some() {
            out.push(conflict(format!("variables/{name}"), name, plugin));
        }
        if c.transition(name).is_some() {
            out.push(conflict(format!("transitions/{name}"), name, plugin));
        }
    }
    for t in &c.transitions {
        for (name, plugin) in &reserved_params {
            if t.input.iter().any(|v| v.name == *name) {
                out.push(conflict(format!("transitions/{}/input/{name}", t.name), name, plugin));
            }
            if t.output.iter().any(|v| v.name == *name) {
                out.push(conflict(format!("transitions/{}/output/{name}", t.name), name, plugin));
            }
        }
    }
    out
}

/// Weaves `plugins` into `contract`.
///
/// Fails with the contract's validation errors, with `E_PLUGIN_REQUIRED`
/// when the contract needs a plugin that is not enabled (admin tags need
/// access control, timed transitions need the timed plugin), or with
/// `E_PLUGIN_CONFLICT` when a user name collides with a plugin name.
pub fn apply_plugins(contract: &Contract, plugins: PluginSet) -> Result<AugmentedContract, Vec<Diagnostic>> {
    let diags = validate(contract);
    if has_errors(&diags) {
        return Err(diags.into_iter().filter(Diagnostic::is_error).collect());
    }
    let mut errors = Vec::new();
    if !plugins.access_control {
        for t in contract.transitions.iter().filter(|t| t.tags.admin) {
            errors.push(Diagnostic::error(
                codes::E_PLUGIN_REQUIRED,
                format!("transitions/{}/tags", t.name),
                format!("transition `{}` is tagged admin but access control is not enabled", t.name),
            ));
        }
    }
    if !plugins.timed_transitions {
        for t in &contract.timed_transitions {
            errors.push(Diagnostic::error(
                codes::E_PLUGIN_REQUIRED,
                format!("timedTransitions/{}", t.name),
                format!("timed transition `{}` requires the timed transitions plugin", t.name),
            ));
        }
    }
    errors.extend(check_plugin_names(contract, plugins));
    if !errors.is_empty() {
        return Err(errors);
    }

    let mut extra_variables = Vec::new();
    if plugins.locking {
        let mut v = Variable::contract(LOCK_VAR, TypeRef::Bool, Visibility::Private);
        v.initializer = Some(Expression::Core { text: "false".into(), ast: crate::expr::CoreExpr::Bool(false) });
        extra_variables.push(v);
    }
    if plugins.transition_counter {
        let mut v = Variable::contract(COUNTER_VAR, TypeRef::Uint, Visibility::Private);
        v.initializer = Some(Expression::Core { text: "0".into(), ast: crate::expr::CoreExpr::Uint(0u64.into()) });
        extra_variables.push(v);
    }
    if plugins.access_control {
        extra_variables.push(Variable::contract(
            ADMINS_VAR,
            TypeRef::Mapping(Box::new(TypeRef::Address), Box::new(TypeRef::Bool)),
            Visibility::Private,
        ));
        extra_variables.push(Variable::contract(ADMIN_COUNT_VAR, TypeRef::Uint, Visibility::Private));
    }

    let generated = if plugins.access_control {
        let admin_tags = Tags { admin: true, ..Tags::default() };
        vec![
            GeneratedTransition {
                name: ADD_ADMIN.into(),
                op: AdminOp::Add,
                input: Variable::input(ADMIN_PARAM, TypeRef::Address),
                tags: admin_tags,
            },
            GeneratedTransition {
                name: REMOVE_ADMIN.into(),
                op: AdminOp::Remove,
                input: Variable::input(ADMIN_PARAM, TypeRef::Address),
                tags: admin_tags,
            },
        ]
    } else {
        Vec::new()
    };

    let mut aug = AugmentedContract {
        base: contract.clone(),
        plugins,
        extra_variables,
        wrappers: Vec::new(),
        extra_inputs: Vec::new(),
        generated,
    };
    let (wrappers, extra_inputs): (Vec<_>, Vec<_>) = aug
        .functions()
        .map(|f| {
            let mut w = Vec::new();
            if plugins.locking {
                w.push(Wrapper::Locking);
            }
            if plugins.transition_counter {
                w.push(Wrapper::TransitionCounting);
            }
            if plugins.timed_transitions {
                w.push(Wrapper::TimedTransitions);
            }
            if plugins.access_control && f.tags().admin {
                w.push(Wrapper::AccessGuard);
            }
            let inputs = if plugins.transition_counter {
                vec![Variable::input(COUNTER_PARAM, TypeRef::Uint)]
            } else {
                Vec::new()
            };
            ((f.name().to_string(), w), (f.name().to_string(), inputs))
        })
        .unzip();
    aug.wrappers = wrappers;
    aug.extra_inputs = extra_inputs.into_iter().filter(|(_, v)| !v.is_empty()).collect();
    Ok(aug)
}

/// Statements of a timed transition, for callers that only hold the
/// augmented contract.
pub fn timed_statements(t: &TimedTransition) -> &[Statement] {
    &t.statements
}
