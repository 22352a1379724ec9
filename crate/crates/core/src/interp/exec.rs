//! Abstract execution of woven contracts with transaction semantics.

use std::collections::{BTreeMap, BTreeSet};

use primitive_types::U256;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::value::{default_value, normalize_address, parse_uint_text, uint_json, value_from_arg, ArgValue, Value};
use super::{Fault, InterpError, RejectCode};
use crate::expr::{Address, BinaryOp, CoreExpr, Expression, Statement, StatementKind, UnaryOp};
use crate::model::{Variable, CREATION_TIME};
use crate::weave::{AdminOp, AugmentedContract, Function, Wrapper};

mod wei {
    use super::*;

    pub fn serialize<S: Serializer>(v: &U256, s: S) -> Result<S::Ok, S::Error> {
        uint_json(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<U256, D::Error> {
        match ArgValue::deserialize(d)? {
            ArgValue::Number(n) => Ok(n.into()),
            ArgValue::Text(t) => parse_uint_text(&t).ok_or_else(|| serde::de::Error::custom("invalid wei amount")),
            _ => Err(serde::de::Error::custom("wei amount must be a number or numeric string")),
        }
    }
}

/// Block and message context of a call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Env {
    pub now: u64,
    pub sender: Address,
    #[serde(default, with = "wei")]
    pub value: U256,
}

/// One call in a schedule. `reentry` is the call an adversarial recipient
/// makes back into the contract at the first send of this call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Invocation {
    pub transition: String,
    #[serde(flatten)]
    pub env: Env,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub args: BTreeMap<String, ArgValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counter_arg: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reentry: Option<Box<Invocation>>,
}

impl Invocation {
    pub fn new(transition: impl Into<String>, now: u64, sender: impl Into<String>) -> Self {
        Invocation {
            transition: transition.into(),
            env: Env { now, sender: Address::new(sender), value: U256::zero() },
            args: BTreeMap::new(),
            counter_arg: None,
            reentry: None,
        }
    }

    pub fn with_value(mut self, value: u64) -> Self {
        self.env.value = value.into();
        self
    }

    pub fn with_arg(mut self, name: impl Into<String>, value: impl Into<ArgValue>) -> Self {
        self.args.insert(name.into(), value.into());
        self
    }

    pub fn with_counter(mut self, n: u64) -> Self {
        self.counter_arg = Some(n);
        self
    }

    pub fn with_reentry(mut self, nested: Invocation) -> Self {
        self.reentry = Some(Box::new(nested));
        self
    }

    /// The same call with every nested reentry removed.
    pub fn without_reentry(&self) -> Self {
        Invocation { reentry: None, ..self.clone() }
    }

    /// Number of frames in this call tree.
    pub fn depth(&self) -> usize {
        1 + self.reentry.as_ref().map_or(0, |r| r.depth())
    }
}

/// Runtime state of a deployed contract.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InstanceState {
    pub current_state: String,
    /// User-declared contract data.
    pub store: BTreeMap<String, Value>,
    pub locked: bool,
    pub counter: u64,
    pub creation_time: u64,
    pub admin_set: BTreeSet<Address>,
    pub balance: U256,
}

impl InstanceState {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "currentState": self.current_state,
            "store": self.store.iter().map(|(k, v)| (k.clone(), v.to_json())).collect::<serde_json::Map<_, _>>(),
            "locked": self.locked,
            "counter": self.counter,
            "creationTime": self.creation_time,
            "adminSet": self.admin_set.iter().map(|a| a.0.clone()).collect::<Vec<_>>(),
            "balance": uint_json(self.balance),
        })
    }

    /// The part of the state a user of the contract observes: current state,
    /// contract data and the ether held.
    pub fn observable(&self) -> (&str, &BTreeMap<String, Value>, U256) {
        (&self.current_state, &self.store, self.balance)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Accepted {
        new_state: String,
        outputs: Vec<(String, Value)>,
        /// Timed transitions fired automatically before the body ran.
        auto_fired: Vec<String>,
    },
    Rejected(RejectCode),
}

impl Outcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Outcome::Accepted { .. })
    }

    pub fn rejection(&self) -> Option<RejectCode> {
        match self {
            Outcome::Rejected(c) => Some(*c),
            Outcome::Accepted { .. } => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Outcome::Accepted { new_state, outputs, auto_fired } => serde_json::json!({
                "status": "accepted",
                "newState": new_state,
                "outputs": outputs.iter().map(|(k, v)| (k.clone(), v.to_json())).collect::<serde_json::Map<_, _>>(),
                "autoFired": auto_fired,
            }),
            Outcome::Rejected(code) => serde_json::json!({ "status": "rejected", "code": code.as_str() }),
        }
    }
}

/// One frame of a trace. Frames are listed in the order they started;
/// top-level calls have depth 1 and a reentrant call one more than its caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub depth: usize,
    /// The call as made, without its nested reentry (that has its own entry).
    pub invocation: Invocation,
    pub outcome: Outcome,
}

impl TraceEntry {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "depth": self.depth,
            "invocation": self.invocation,
            "outcome": self.outcome.to_json(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    pub final_state: InstanceState,
}

impl Trace {
    pub fn all_accepted(&self) -> bool {
        self.entries.iter().all(|e| e.outcome.is_accepted())
    }

    /// Outcomes of the top-level calls, in schedule order.
    pub fn top_level(&self) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter().filter(|e| e.depth == 1)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "entries": self.entries.iter().map(TraceEntry::to_json).collect::<Vec<_>>(),
            "finalState": self.final_state.to_json(),
        })
    }
}

/// Result of a single top-level invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub state: InstanceState,
    pub outcome: Outcome,
    pub entries: Vec<TraceEntry>,
}

fn require_core(e: &Expression, path: impl FnOnce() -> String) -> Result<&CoreExpr, InterpError> {
    e.core().ok_or_else(|| InterpError::Uninterpretable { path: path(), text: e.text().to_string() })
}

fn require_core_stmt(s: &Statement, path: impl FnOnce() -> String) -> Result<(), InterpError> {
    if s.is_core() {
        Ok(())
    } else {
        Err(InterpError::Uninterpretable { path: path(), text: s.text.clone() })
    }
}

/// Fails if running `function` could reach an opaque guard or statement.
pub fn check_function_interpretable(aug: &AugmentedContract, function: &str) -> Result<(), InterpError> {
    let Some(f) = aug.function(function) else {
        return Err(InterpError::UnknownTransition(function.to_string()));
    };
    if let Function::User(t) = f {
        for (i, g) in t.guards.iter().enumerate() {
            require_core(g, || format!("transitions/{}/guards/{i}", t.name))?;
        }
        for (i, s) in t.statements.iter().enumerate() {
            require_core_stmt(s, || format!("transitions/{}/statements/{i}", t.name))?;
        }
    }
    if aug.wrappers_for(function).contains(&Wrapper::TimedTransitions) {
        for t in &aug.base().timed_transitions {
            for (i, g) in t.guards.iter().enumerate() {
                require_core(g, || format!("timedTransitions/{}/guards/{i}", t.name))?;
            }
            for (i, s) in t.statements.iter().enumerate() {
                require_core_stmt(s, || format!("timedTransitions/{}/statements/{i}", t.name))?;
            }
        }
    }
    Ok(())
}

/// Fails if any part of the contract is outside the interpretable core.
pub fn check_interpretable(aug: &AugmentedContract) -> Result<(), InterpError> {
    for v in &aug.base().variables {
        if let Some(init) = &v.initializer {
            require_core(init, || format!("variables/{}/initializer", v.name))?;
        }
    }
    aug.functions().try_for_each(|f| check_function_interpretable(aug, f.name()))
}

/// Deploys the contract: initial state, evaluated initializers and, with
/// access control, the creator as sole administrator.
pub fn init_instance(
    aug: &AugmentedContract,
    creation_time: u64,
    creator: &Address,
) -> Result<InstanceState, InterpError> {
    let c = aug.base();
    let mut st = InstanceState {
        current_state: c.initial_state().unwrap_or_default().to_string(),
        store: BTreeMap::new(),
        locked: false,
        counter: 0,
        creation_time,
        admin_set: BTreeSet::new(),
        balance: U256::zero(),
    };
    if aug.plugins().access_control {
        st.admin_set.insert(normalize_address(&creator.0));
    }
    let env = Env { now: creation_time, sender: creator.clone(), value: U256::zero() };
    let m = Machine { aug, trace: Vec::new(), probe: false, probed: None };
    for v in &c.variables {
        let value = match &v.initializer {
            None => default_value(&v.ty, c),
            Some(init) => {
                let ast = require_core(init, || format!("variables/{}/initializer", v.name))?;
                let mut value = m.eval(ast, &st, &BTreeMap::new(), &env).map_err(|f| match f {
                    Fault::Reject(code) => InterpError::Deployment { variable: v.name.clone(), code },
                    Fault::Error(e) => e,
                })?;
                value.normalize();
                value
            }
        };
        st.store.insert(v.name.clone(), value);
    }
    Ok(st)
}

/// Executes one top-level call. A rejected call leaves the state untouched.
pub fn invoke(aug: &AugmentedContract, state: &InstanceState, call: &Invocation) -> Result<Step, InterpError> {
    let mut st = state.clone();
    let mut m = Machine { aug, trace: Vec::new(), probe: false, probed: None };
    m.call(&mut st, call, 1, call.env.now)?;
    let outcome = m.trace[0].outcome.clone();
    Ok(Step { state: st, outcome, entries: m.trace })
}

/// Runs `call` without reentry and reports where its first send would hand
/// control to another account: the recipient and the state at that moment.
/// `None` if the call is rejected before or without sending.
pub(crate) fn probe_first_send(
    aug: &AugmentedContract,
    state: &InstanceState,
    call: &Invocation,
) -> Result<Option<(Address, InstanceState)>, InterpError> {
    let mut st = state.clone();
    let mut m = Machine { aug, trace: Vec::new(), probe: true, probed: None };
    m.call(&mut st, &call.without_reentry(), 1, call.env.now)?;
    Ok(m.probed)
}

/// Deploys the contract and runs `calls` in order.
pub fn run_schedule(
    aug: &AugmentedContract,
    creation_time: u64,
    creator: &Address,
    calls: &[Invocation],
) -> Result<Trace, InterpError> {
    let st = init_instance(aug, creation_time, creator)?;
    run_from(aug, st, calls)
}

/// Runs `calls` in order from an existing state.
pub fn run_from(aug: &AugmentedContract, mut st: InstanceState, calls: &[Invocation]) -> Result<Trace, InterpError> {
    let mut entries = Vec::new();
    for call in calls {
        let step = invoke(aug, &st, call)?;
        st = step.state;
        entries.extend(step.entries);
    }
    Ok(Trace { entries, final_state: st })
}

/// Location inside a value: a mapping key or array index, or a struct field.
enum Seg {
    Index(Value),
    Field(String),
}

fn mismatch(what: &str) -> Fault {
    Fault::Error(InterpError::Uninterpretable { path: String::new(), text: format!("type mismatch in {what}") })
}

fn slot<'v>(mut v: &'v mut Value, segs: &[Seg]) -> Result<&'v mut Value, Fault> {
    for s in segs {
        v = match (v, s) {
            (Value::Map { default, entries }, Seg::Index(k)) => {
                entries.entry(k.clone()).or_insert_with(|| default.as_ref().clone())
            }
            (Value::Array(items), Seg::Index(Value::Uint(i))) => {
                let idx = if i.bits() <= 64 { i.low_u64() as usize } else { usize::MAX };
                items.get_mut(idx).ok_or(Fault::Reject(RejectCode::OutOfBounds))?
            }
            (Value::Struct(fields), Seg::Field(f)) => fields.get_mut(f).ok_or_else(|| mismatch("member access"))?,
            _ => return Err(mismatch("assignment target")),
        };
    }
    Ok(v)
}

struct Machine<'a> {
    aug: &'a AugmentedContract,
    trace: Vec<TraceEntry>,
    /// When set, the first send of the top-level frame records its
    /// recipient and the state at that point.
    probe: bool,
    probed: Option<(Address, InstanceState)>,
}

type Locals = BTreeMap<String, Value>;

impl<'a> Machine<'a> {
    fn eval(&self, e: &CoreExpr, st: &InstanceState, locals: &Locals, env: &Env) -> Result<Value, Fault> {
        Ok(match e {
            CoreExpr::Uint(u) => Value::Uint(*u),
            CoreExpr::Bool(b) => Value::Bool(*b),
            CoreExpr::Address(a) => Value::Address(normalize_address(&a.0)),
            CoreExpr::Var(name) => match locals.get(name).or_else(|| st.store.get(name)) {
                Some(v) => v.clone(),
                None if name == CREATION_TIME => Value::Uint(st.creation_time.into()),
                None => return Err(mismatch("variable lookup")),
            },
            CoreExpr::Now => Value::Uint(env.now.into()),
            CoreExpr::MsgSender => Value::Address(normalize_address(&env.sender.0)),
            CoreExpr::MsgValue => Value::Uint(env.value),
            CoreExpr::Index(base, key) => {
                let b = self.eval(base, st, locals, env)?;
                let k = self.eval(key, st, locals, env)?;
                match (b, k) {
                    (Value::Map { default, mut entries }, k) => entries.remove(&k).unwrap_or(*default),
                    (Value::Array(mut items), Value::Uint(i)) => {
                        if i >= U256::from(items.len()) {
                            return Err(Fault::Reject(RejectCode::OutOfBounds));
                        }
                        items.swap_remove(i.low_u64() as usize)
                    }
                    _ => return Err(mismatch("index")),
                }
            }
            CoreExpr::Member(base, field) => match self.eval(base, st, locals, env)? {
                Value::Struct(mut fields) => fields.remove(field).ok_or_else(|| mismatch("member access"))?,
                _ => return Err(mismatch("member access")),
            },
            CoreExpr::Length(base) => match self.eval(base, st, locals, env)? {
                Value::Array(items) => Value::Uint(items.len().into()),
                _ => return Err(mismatch("length")),
            },
            CoreExpr::Unary(op, inner) => {
                let v = self.eval(inner, st, locals, env)?;
                match (op, v) {
                    (UnaryOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    (UnaryOp::Neg, Value::Uint(u)) if u.is_zero() => Value::Uint(u),
                    (UnaryOp::Neg, Value::Uint(_)) => return Err(Fault::Reject(RejectCode::Overflow)),
                    _ => return Err(mismatch("unary operator")),
                }
            }
            CoreExpr::Binary(op, l, r) => self.binary(*op, l, r, st, locals, env)?,
            CoreExpr::StructLit { name, fields } => {
                let mut v = match default_value(&crate::expr::TypeRef::Struct(name.clone()), self.aug.base()) {
                    Value::Struct(m) => m,
                    _ => return Err(mismatch("struct literal")),
                };
                for (f, fe) in fields {
                    v.insert(f.clone(), self.eval(fe, st, locals, env)?);
                }
                Value::Struct(v)
            }
        })
    }

    fn binary(
        &self,
        op: BinaryOp,
        l: &CoreExpr,
        r: &CoreExpr,
        st: &InstanceState,
        locals: &Locals,
        env: &Env,
    ) -> Result<Value, Fault> {
        let lv = self.eval(l, st, locals, env)?;
        // Solidity short-circuits && and ||.
        match (op, &lv) {
            (BinaryOp::And, Value::Bool(false)) => return Ok(Value::Bool(false)),
            (BinaryOp::Or, Value::Bool(true)) => return Ok(Value::Bool(true)),
            _ => {}
        }
        let rv = self.eval(r, st, locals, env)?;
        let overflow = Fault::Reject(RejectCode::Overflow);
        Ok(match (op, lv, rv) {
            (BinaryOp::Eq, a, b) => Value::Bool(a == b),
            (BinaryOp::Ne, a, b) => Value::Bool(a != b),
            (BinaryOp::And | BinaryOp::Or, Value::Bool(_), Value::Bool(b)) => Value::Bool(b),
            (BinaryOp::Add, Value::Uint(a), Value::Uint(b)) => Value::Uint(a.checked_add(b).ok_or(overflow)?),
            (BinaryOp::Sub, Value::Uint(a), Value::Uint(b)) => Value::Uint(a.checked_sub(b).ok_or(overflow)?),
            (BinaryOp::Mul, Value::Uint(a), Value::Uint(b)) => Value::Uint(a.checked_mul(b).ok_or(overflow)?),
            (BinaryOp::Lt, Value::Uint(a), Value::Uint(b)) => Value::Bool(a < b),
            (BinaryOp::Le, Value::Uint(a), Value::Uint(b)) => Value::Bool(a <= b),
            (BinaryOp::Gt, Value::Uint(a), Value::Uint(b)) => Value::Bool(a > b),
            (BinaryOp::Ge, Value::Uint(a), Value::Uint(b)) => Value::Bool(a >= b),
            _ => return Err(mismatch("binary operator")),
        })
    }

    fn place(&self, e: &CoreExpr, st: &InstanceState, locals: &Locals, env: &Env) -> Result<(String, Vec<Seg>), Fault> {
        match e {
            CoreExpr::Var(name) => Ok((name.clone(), Vec::new())),
            CoreExpr::Index(base, key) => {
                let (root, mut segs) = self.place(base, st, locals, env)?;
                segs.push(Seg::Index(self.eval(key, st, locals, env)?));
                Ok((root, segs))
            }
            CoreExpr::Member(base, field) => {
                let (root, mut segs) = self.place(base, st, locals, env)?;
                segs.push(Seg::Field(field.clone()));
                Ok((root, segs))
            }
            _ => Err(mismatch("assignment target")),
        }
    }

    /// Applies `update` to the storage location `root/segs`.
    fn write(
        &self,
        st: &mut InstanceState,
        locals: &mut Locals,
        root: &str,
        segs: &[Seg],
        update: impl FnOnce(&mut Value) -> Result<(), Fault>,
    ) -> Result<(), Fault> {
        if let Some(v) = locals.get_mut(root) {
            return update(slot(v, segs)?);
        }
        if let Some(v) = st.store.get_mut(root) {
            update(slot(v, segs)?)?;
            v.normalize();
            return Ok(());
        }
        if root == CREATION_TIME && segs.is_empty() {
            let mut v = Value::Uint(st.creation_time.into());
            update(&mut v)?;
            let u = v.as_uint().ok_or_else(|| mismatch("creation time"))?;
            st.creation_time =
                if u.bits() <= 64 { u.low_u64() } else { return Err(Fault::Reject(RejectCode::Overflow)) };
            return Ok(());
        }
        Err(mismatch("assignment target"))
    }

    fn exec(
        &mut self,
        s: &Statement,
        st: &mut InstanceState,
        locals: &mut Locals,
        env: &Env,
        reentry: &mut Option<&Invocation>,
        depth: usize,
    ) -> Result<(), Fault> {
        match &s.kind {
            StatementKind::Assign { target, value } => {
                let v = self.eval(value, st, locals, env)?;
                let (root, segs) = self.place(target, st, locals, env)?;
                self.write(st, locals, &root, &segs, |slot| {
                    *slot = v;
                    Ok(())
                })
            }
            StatementKind::MappingPush { target, value } => {
                let v = self.eval(value, st, locals, env)?;
                let (root, segs) = self.place(target, st, locals, env)?;
                self.write(st, locals, &root, &segs, |slot| match slot {
                    Value::Array(items) => {
                        items.push(v);
                        Ok(())
                    }
                    _ => Err(mismatch("push")),
                })
            }
            StatementKind::Send { recipient, amount } => {
                let to = self.eval(recipient, st, locals, env)?;
                let to = to.as_address().ok_or_else(|| mismatch("send recipient"))?;
                let amount = self.eval(amount, st, locals, env)?.as_uint().ok_or_else(|| mismatch("send amount"))?;
                st.balance = st.balance.checked_sub(amount).ok_or(Fault::Reject(RejectCode::InsufficientBalance))?;
                if self.probe && depth == 1 && self.probed.is_none() {
                    self.probed = Some((to.clone(), st.clone()));
                }
                if let Some(nested) = reentry.take() {
                    self.call(st, nested, depth + 1, env.now).map_err(Fault::Error)?;
                }
                Ok(())
            }
            StatementKind::Opaque => {
                Err(Fault::Error(InterpError::Uninterpretable { path: String::new(), text: s.text.clone() }))
            }
        }
    }

    fn guard(&self, g: &Expression, st: &InstanceState, locals: &Locals, env: &Env) -> Result<bool, Fault> {
        let ast = g.core().ok_or_else(|| mismatch("guard"))?;
        self.eval(ast, st, locals, env)?.as_bool().ok_or_else(|| mismatch("guard"))
    }

    /// Runs one frame with rollback on rejection. Tooling errors propagate.
    fn call(&mut self, st: &mut InstanceState, inv: &Invocation, depth: usize, now: u64) -> Result<(), InterpError> {
        if inv.env.now != now {
            return Err(InterpError::BadSchedule(format!(
                "reentrant call to `{}` must share its caller's time {now}",
                inv.transition
            )));
        }
        let aug = self.aug;
        let f = aug.function(&inv.transition).ok_or_else(|| InterpError::UnknownTransition(inv.transition.clone()))?;
        check_function_interpretable(aug, f.name())?;
        let locals = bind_arguments(aug, &f, inv)?;

        let idx = self.trace.len();
        self.trace.push(TraceEntry {
            depth,
            invocation: inv.without_reentry(),
            outcome: Outcome::Rejected(RejectCode::RevertedByCaller),
        });
        let snapshot = st.clone();
        match self.frame(st, &f, inv, locals, depth) {
            Ok(outcome) => {
                self.trace[idx].outcome = outcome;
                Ok(())
            }
            Err(Fault::Reject(code)) => {
                *st = snapshot;
                self.trace[idx].outcome = Outcome::Rejected(code);
                for e in &mut self.trace[idx + 1..] {
                    if e.outcome.is_accepted() {
                        e.outcome = Outcome::Rejected(RejectCode::RevertedByCaller);
                    }
                }
                Ok(())
            }
            Err(Fault::Error(e)) => Err(e),
        }
    }

    fn frame(
        &mut self,
        st: &mut InstanceState,
        f: &Function<'a>,
        inv: &Invocation,
        mut locals: Locals,
        depth: usize,
    ) -> Result<Outcome, Fault> {
        let env = &inv.env;
        let mut reentry = inv.reentry.as_deref();
        if !env.value.is_zero() && !f.tags().payable {
            return Err(Fault::Reject(RejectCode::NotPayable));
        }
        st.balance = st.balance.checked_add(env.value).ok_or(Fault::Reject(RejectCode::Overflow))?;

        let wrappers = self.aug.wrappers_for(f.name());
        let mut auto_fired = Vec::new();
        for w in wrappers {
            match w {
                Wrapper::Locking => {
                    if st.locked {
                        return Err(Fault::Reject(RejectCode::Locked));
                    }
                    st.locked = true;
                }
                Wrapper::TransitionCounting => {
                    if inv.counter_arg != Some(st.counter) {
                        return Err(Fault::Reject(RejectCode::BadCounter));
                    }
                    st.counter = st.counter.checked_add(1).ok_or(Fault::Reject(RejectCode::Overflow))?;
                }
                Wrapper::TimedTransitions => {
                    auto_fired = self.fire_timed(st, env, &mut reentry, depth)?;
                }
                Wrapper::AccessGuard => {
                    if !st.admin_set.contains(&normalize_address(&env.sender.0)) {
                        return Err(Fault::Reject(RejectCode::NotAdmin));
                    }
                }
            }
        }

        match f {
            Function::User(t) => {
                if st.current_state != t.from {
                    return Err(Fault::Reject(RejectCode::WrongState));
                }
                for g in &t.guards {
                    if !self.guard(g, st, &locals, env)? {
                        return Err(Fault::Reject(RejectCode::GuardFalse));
                    }
                }
                for s in &t.statements {
                    self.exec(s, st, &mut locals, env, &mut reentry, depth)?;
                }
                st.current_state = t.to.clone();
            }
            Function::Admin(g) => {
                let Some(Value::Address(who)) = locals.get(&g.input.name) else {
                    return Err(mismatch("administrator argument"));
                };
                match g.op {
                    AdminOp::Add => {
                        st.admin_set.insert(who.clone());
                    }
                    AdminOp::Remove => {
                        if st.admin_set.contains(who) {
                            if st.admin_set.len() <= 1 {
                                return Err(Fault::Reject(RejectCode::LastAdmin));
                            }
                            st.admin_set.remove(who);
                        }
                    }
                }
            }
        }

        if wrappers.contains(&Wrapper::Locking) {
            st.locked = false;
        }
        let outputs = f.output().iter().map(|v| (v.name.clone(), locals[&v.name].clone())).collect();
        Ok(Outcome::Accepted { new_state: st.current_state.clone(), outputs, auto_fired })
    }

    /// One pass over the timed transitions in firing order. A transition
    /// that moves the state can enable later ones in the same pass.
    fn fire_timed(
        &mut self,
        st: &mut InstanceState,
        env: &Env,
        reentry: &mut Option<&Invocation>,
        depth: usize,
    ) -> Result<Vec<String>, Fault> {
        let mut fired = Vec::new();
        let mut locals = Locals::new();
        for t in self.aug.timed_in_firing_order() {
            if st.current_state != t.from {
                continue;
            }
            let created = self
                .eval(&CoreExpr::Var(CREATION_TIME.to_string()), st, &locals, env)?
                .as_uint()
                .ok_or_else(|| mismatch("creation time"))?;
            let due = created.checked_add(t.time.into()).ok_or(Fault::Reject(RejectCode::Overflow))?;
            if U256::from(env.now) < due {
                continue;
            }
            let mut ok = true;
            for g in &t.guards {
                if !self.guard(g, st, &locals, env)? {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            for s in &t.statements {
                self.exec(s, st, &mut locals, env, reentry, depth)?;
            }
            st.current_state = t.to.clone();
            fired.push(t.name.clone());
        }
        Ok(fired)
    }
}

fn bind_arguments(aug: &AugmentedContract, f: &Function<'_>, inv: &Invocation) -> Result<Locals, InterpError> {
    let bad = |detail: String| InterpError::BadArgs { transition: inv.transition.clone(), detail };
    let counter_on = aug.plugins().transition_counter;
    if counter_on != inv.counter_arg.is_some() {
        return Err(bad(if counter_on {
            "counterArg is required when the transition counter is enabled".into()
        } else {
            "counterArg is only allowed when the transition counter is enabled".into()
        }));
    }
    let inputs: &[Variable] = f.input();
    for name in inv.args.keys() {
        if !inputs.iter().any(|v| &v.name == name) {
            return Err(bad(format!("unexpected argument `{name}`")));
        }
    }
    let mut locals = Locals::new();
    for v in inputs {
        let arg = inv.args.get(&v.name).ok_or_else(|| bad(format!("missing argument `{}`", v.name)))?;
        let value = value_from_arg(arg, &v.ty).map_err(|e| bad(format!("`{}`: {e}", v.name)))?;
        locals.insert(v.name.clone(), value);
    }
    for v in f.output() {
        locals.insert(v.name.clone(), default_value(&v.ty, aug.base()));
    }
    Ok(locals)
}
