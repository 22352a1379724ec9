//! Random generation of valid contracts and of call schedules.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use fsmsolc_core::expr::TypeRef;
use fsmsolc_core::interp::{invoke, InstanceState, Invocation, Step};
use fsmsolc_core::weave::{AugmentedContract, Function};

use super::{ALICE, BOB};

pub const CAROL: &str = "0x00000000000000000000000000000000000000c3";
pub const SENDERS: [&str; 3] = [ALICE, BOB, CAROL];

/// Source text of a random contract that parses and validates without
/// errors. Uses uint, bool, address, mapping and array variables with core
/// guards and statements, plus a few opaque snippets.
pub fn random_contract_source(rng: &mut StdRng) -> String {
    let n_states = rng.gen_range(1..=5);
    let states: Vec<String> = (0..n_states).map(|i| format!("S{i}")).collect();
    let initial = rng.gen_range(0..n_states);
    let mut out = format!("contract C{} {{\n", rng.gen_range(0..1000));
    for (i, s) in states.iter().enumerate() {
        let kw = if i == initial { "initial " } else { "" };
        out += &format!("    state {kw}{s};\n");
    }
    let with_struct = rng.gen_bool(0.3);
    if with_struct {
        out += "    struct Entry {\n        uint amount;\n        bool open;\n    }\n";
    }
    let vis = |rng: &mut StdRng| if rng.gen_bool(0.5) { "public" } else { "private" };
    let n_uint = rng.gen_range(0..3);
    let n_bool = rng.gen_range(0..2);
    for i in 0..n_uint {
        let init = if rng.gen_bool(0.5) { format!(" = {}", rng.gen_range(0..100)) } else { String::new() };
        out += &format!("    var {} uint u{i}{init};\n", vis(rng));
    }
    for i in 0..n_bool {
        let init = if rng.gen_bool(0.5) { " = true" } else { "" };
        out += &format!("    var {} bool b{i}{init};\n", vis(rng));
    }
    let with_map = rng.gen_bool(0.5);
    if with_map {
        out += &format!("    var {} mapping(address => uint) balances;\n", vis(rng));
    }
    let with_addr = rng.gen_bool(0.4);
    if with_addr {
        out += &format!("    var {} address owner;\n", vis(rng));
    }
    let with_array = rng.gen_bool(0.3);
    if with_array {
        out += &format!("    var {} uint[] history;\n", vis(rng));
    }
    if with_struct {
        out += &format!("    var {} Entry last;\n", vis(rng));
    }
    if rng.gen_bool(0.2) {
        out += &format!("    var {} string label;\n", vis(rng));
    }

    let uints: Vec<String> = (0..n_uint).map(|i| format!("u{i}")).collect();
    let bools: Vec<String> = (0..n_bool).map(|i| format!("b{i}")).collect();

    let n_trans = rng.gen_range(0..6);
    for i in 0..n_trans {
        let from = states.choose(rng).unwrap();
        let to = states.choose(rng).unwrap();
        out += &format!("    transition t{i} {{\n        from {from};\n        to {to};\n");
        let mut tags = Vec::new();
        for tag in ["payable", "admin", "event"] {
            if rng.gen_bool(0.25) {
                tags.push(tag);
            }
        }
        if !tags.is_empty() {
            out += &format!("        tags {};\n", tags.join(", "));
        }
        let has_input = rng.gen_bool(0.4);
        if has_input {
            out += "        input uint amount, bool flag;\n";
        }
        let has_output = rng.gen_bool(0.3);
        if has_output {
            out += "        output uint result;\n";
        }
        for _ in 0..rng.gen_range(0..3) {
            out += &format!("        guard {};\n", random_guard(rng, &uints, &bools, with_map, has_input));
        }
        let n_stmts = rng.gen_range(0..4);
        if n_stmts > 0 || has_output {
            out += "        do {\n";
            for _ in 0..n_stmts {
                let s = random_statement(rng, &uints, &bools, with_map, with_addr, with_array, with_struct, has_input);
                out += &format!("            {s};\n");
            }
            if has_output {
                out += &format!("            result = {};\n", random_uint(rng, &uints, with_map, has_input));
            }
            out += "        }\n";
        }
        out += "    }\n";
    }
    for i in 0..rng.gen_range(0..3) {
        let from = states.choose(rng).unwrap();
        let to = states.choose(rng).unwrap();
        let time = ["30 seconds", "2 hours", "1 days", "5 days", "1 weeks", "600"].choose(rng).unwrap();
        out +=
            &format!("    timed transition tt{i} {{\n        from {from};\n        to {to};\n        time {time};\n");
        if rng.gen_bool(0.3) {
            out += &format!("        guard {};\n", random_guard(rng, &uints, &bools, with_map, false));
        }
        if !uints.is_empty() && rng.gen_bool(0.4) {
            let u = uints.choose(rng).unwrap();
            out += &format!("        do {{\n            {u} = {u} + 1;\n        }}\n");
        }
        out += "    }\n";
    }
    out += "}\n";
    out
}

fn random_uint(rng: &mut StdRng, uints: &[String], with_map: bool, has_input: bool) -> String {
    let mut options = vec![rng.gen_range(0..1000).to_string(), "msg.value".to_string(), "now".to_string()];
    options.extend(uints.iter().cloned());
    if with_map {
        options.push("balances[msg.sender]".into());
    }
    if has_input {
        options.push("amount".into());
    }
    options.choose(rng).unwrap().clone()
}

fn random_guard(rng: &mut StdRng, uints: &[String], bools: &[String], with_map: bool, has_input: bool) -> String {
    match rng.gen_range(0..6) {
        0 if !bools.is_empty() => bools.choose(rng).unwrap().clone(),
        1 if !bools.is_empty() => format!("!{}", bools.choose(rng).unwrap()),
        2 => format!("now >= creationTime + {} days", rng.gen_range(1..10)),
        3 => "keccak256(msg.sender) != bytes32(0)".to_string(),
        4 if has_input => "flag && amount > 0".to_string(),
        _ => {
            let op = ["<", "<=", ">", ">=", "==", "!="].choose(rng).unwrap();
            let a = random_uint(rng, uints, with_map, has_input);
            let b = random_uint(rng, uints, with_map, has_input);
            format!("{a} {op} {b}")
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn random_statement(
    rng: &mut StdRng,
    uints: &[String],
    bools: &[String],
    with_map: bool,
    with_addr: bool,
    with_array: bool,
    with_struct: bool,
    has_input: bool,
) -> String {
    loop {
        let s = match rng.gen_range(0..9) {
            0 if !uints.is_empty() => {
                let u = uints.choose(rng).unwrap();
                let op = ["+", "-", "*"].choose(rng).unwrap();
                format!("{u} = {u} {op} {}", random_uint(rng, uints, with_map, has_input))
            }
            1 if !bools.is_empty() => {
                let b = bools.choose(rng).unwrap();
                format!("{b} = !{b}")
            }
            2 if with_map => {
                format!(
                    "balances[msg.sender] = balances[msg.sender] + {}",
                    random_uint(rng, uints, with_map, has_input)
                )
            }
            3 if with_map => "msg.sender.transfer(balances[msg.sender])".to_string(),
            4 if with_addr => "owner = msg.sender".to_string(),
            5 if with_array => format!("history.push({})", random_uint(rng, uints, with_map, has_input)),
            6 if with_struct => {
                format!("last = Entry({{amount: {}, open: true}})", random_uint(rng, uints, with_map, has_input))
            }
            7 => "selfdestruct(msg.sender)".to_string(),
            8 if !uints.is_empty() => format!("{} = uint(keccak256(now))", uints.choose(rng).unwrap()),
            _ => continue,
        };
        return s;
    }
}

/// A random argument value for a parameter of type `ty`.
fn random_arg(rng: &mut StdRng, ty: &TypeRef) -> fsmsolc_core::interp::ArgValue {
    match ty {
        TypeRef::Bool => rng.gen_bool(0.5).into(),
        TypeRef::Address => (*SENDERS.choose(rng).unwrap()).into(),
        TypeRef::Bytes32 => 0u64.into(),
        _ => rng.gen_range(0..6u64).into(),
    }
}

/// A random call to some function of `aug` at time `now`, with a counter
/// argument that is usually, but not always, the expected one.
///
/// Calls favour functions enabled in the current state, and a reentrant
/// call usually comes from the caller, who receives any transfer.
pub fn random_call(
    rng: &mut StdRng,
    aug: &AugmentedContract,
    st: &InstanceState,
    now: u64,
    nesting: usize,
) -> Invocation {
    random_call_from(rng, aug, st, now, nesting, None)
}

fn random_call_from(
    rng: &mut StdRng,
    aug: &AugmentedContract,
    st: &InstanceState,
    now: u64,
    nesting: usize,
    caller: Option<&str>,
) -> Invocation {
    let functions: Vec<_> = aug.functions().collect();
    let enabled: Vec<_> = functions
        .iter()
        .filter(|f| match f {
            Function::User(t) => t.from == st.current_state,
            Function::Admin(_) => true,
        })
        .collect();
    let f = if !enabled.is_empty() && rng.gen_bool(0.7) {
        enabled.choose(rng).unwrap()
    } else {
        functions.choose(rng).unwrap()
    };
    let sender = match caller {
        Some(c) if rng.gen_bool(0.8) => c,
        _ => *SENDERS.choose(rng).unwrap(),
    };
    let mut call = Invocation::new(f.name(), now, sender);
    let payable = f.tags().payable;
    if (payable && rng.gen_bool(0.7)) || rng.gen_bool(0.05) {
        call = call.with_value(rng.gen_range(1..4));
    }
    for p in f.input() {
        call = call.with_arg(p.name.clone(), random_arg(rng, &p.ty));
    }
    if aug.plugins().transition_counter {
        let n = match rng.gen_range(0..10) {
            0 => st.counter + 1,
            1 => rng.gen_range(0..4),
            _ => st.counter + nesting as u64,
        };
        call = call.with_counter(n);
    }
    if nesting < 3 && rng.gen_bool(0.3) {
        call = call.with_reentry(random_call_from(rng, aug, st, now, nesting + 1, Some(sender)));
    }
    call
}

/// A single step of a random run: the state before the call, the call and
/// its result.
pub struct RunStep {
    pub pre: InstanceState,
    pub call: Invocation,
    pub step: Step,
}

/// Runs `len` random calls from `start`, beginning at time `now` and never
/// going back.
pub fn random_run(
    rng: &mut StdRng,
    aug: &AugmentedContract,
    start: InstanceState,
    mut now: u64,
    len: usize,
) -> Vec<RunStep> {
    let mut st = start;
    let mut steps = Vec::with_capacity(len);
    for _ in 0..len {
        now += [0, 0, 1, 60, 3_600, 86_400, 432_000].choose(rng).unwrap();
        let call = random_call(rng, aug, &st, now, 0);
        let step = invoke(aug, &st, &call).unwrap_or_else(|e| panic!("{call:?}: {e}"));
        let pre = std::mem::replace(&mut st, step.state.clone());
        steps.push(RunStep { pre, call, step });
    }
    steps
}

/// A blind-auction instance in state F where every sender is owed
/// their deposits: each bids, then the auction is closed and finished.
pub fn funded_auction(aug: &AugmentedContract) -> InstanceState {
    let mut st = fsmsolc_core::interp::init_instance(aug, super::CREATED, &super::alice()).unwrap();
    let end = super::CREATED + super::FIVE_DAYS;
    let mut calls: Vec<_> =
        [(ALICE, 1), (BOB, 2), (CAROL, 3)].map(|(who, v)| super::bid(super::CREATED, who, v)).into();
    if aug.function("close").is_some() {
        calls.push(super::call("close", end, ALICE));
    }
    calls.push(super::call("finish", end, ALICE));
    for mut call in calls {
        if aug.plugins().transition_counter {
            call = call.with_counter(st.counter);
        }
        let step = invoke(aug, &st, &call).unwrap();
        assert!(step.outcome.is_accepted(), "{call:?}: {:?}", step.outcome);
        st = step.state;
    }
    assert_eq!(st.current_state, "F");
    st
}
