//! Bounded exhaustive searches for reentrancy and transaction-ordering
//! problems.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use itertools::Itertools;
use primitive_types::U256;

use super::exec::{init_instance, invoke, probe_first_send, run_schedule, InstanceState, Invocation, Trace};
use super::value::{ArgValue, Value};
use super::{check_interpretable, InterpError};
use crate::expr::{Address, CoreExpr, TypeRef};
use crate::weave::AugmentedContract;

/// Bounds of the reentrancy search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBounds {
    /// Frames per call tree: 1 means no reentry, 2 one reentrant call, 3 a
    /// reentrant call that is itself reentered. At most 3.
    pub depth_limit: usize,
    /// Calls executed before the attacked call.
    pub prefix_len: usize,
    /// Accounts that make calls. The first one deploys the contract.
    pub senders: Vec<Address>,
    pub creation_time: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            depth_limit: 2,
            prefix_len: 4,
            senders: vec![
                Address::new("0x00000000000000000000000000000000000000a1"),
                Address::new("0x00000000000000000000000000000000000000b2"),
            ],
            creation_time: 1_000,
        }
    }
}

/// A schedule whose last call is reentered with an accepted nested call and
/// ends in a different observable state than the same schedule without the
/// reentry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReentrancyWitness {
    pub schedule: Vec<Invocation>,
    pub trace: Trace,
    pub baseline: Trace,
}

/// Candidate argument values per parameter type.
fn arg_domain(ty: &TypeRef, senders: &[Address]) -> Option<Vec<ArgValue>> {
    Some(match ty {
        TypeRef::Uint => vec![ArgValue::Number(0), ArgValue::Number(1)],
        TypeRef::Bool => vec![ArgValue::Bool(false), ArgValue::Bool(true)],
        TypeRef::Address => senders.iter().map(|a| ArgValue::Text(a.0.clone())).collect(),
        TypeRef::Bytes32 => vec![ArgValue::Number(0)],
        TypeRef::Array(_) => vec![ArgValue::List(Vec::new())],
        _ => return None,
    })
}

/// Times worth trying: creation and creation plus every constant that the
/// contract compares against or adds to time, which covers duration guards
/// and timed transitions.
fn time_points(aug: &AugmentedContract, creation: u64) -> Vec<u64> {
    let mut offsets = BTreeSet::from([0u64]);
    let c = aug.base();
    offsets.extend(c.timed_transitions.iter().map(|t| t.time));
    for t in &c.transitions {
        for g in t.guards.iter().filter_map(|g| g.core()) {
            let mut mentions_now = false;
            g.visit(&mut |e| mentions_now |= matches!(e, CoreExpr::Now));
            if mentions_now {
                g.visit(&mut |e| {
                    if let CoreExpr::Uint(u) = e {
                        if u.bits() <= 64 {
                            offsets.insert(u.low_u64());
                        }
                    }
                });
            }
        }
    }
    offsets.into_iter().filter_map(|o| creation.checked_add(o)).collect()
}

/// Every call the search may make, with counter arguments left unset.
fn alphabet(aug: &AugmentedContract, bounds: &SearchBounds) -> Vec<Invocation> {
    let times = time_points(aug, bounds.creation_time);
    let mut out = Vec::new();
    for f in aug.functions() {
        let domains: Option<Vec<Vec<(String, ArgValue)>>> = f
            .input()
            .iter()
            .map(|v| arg_domain(&v.ty, &bounds.senders).map(|d| d.into_iter().map(|a| (v.name.clone(), a)).collect()))
            .collect();
        let Some(domains) = domains else { continue };
        let value = if f.tags().payable { 1u64 } else { 0 };
        for args in domains.into_iter().multi_cartesian_product_or_unit() {
            for sender in &bounds.senders {
                for &now in &times {
                    out.push(Invocation {
                        transition: f.name().to_string(),
                        env: super::Env { now, sender: sender.clone(), value: U256::from(value) },
                        args: args.iter().cloned().collect::<BTreeMap<_, _>>(),
                        counter_arg: None,
                        reentry: None,
                    });
                }
            }
        }
    }
    out
}

/// `multi_cartesian_product` yields nothing for zero factors; a function
/// without inputs still has exactly one argument tuple.
trait CartesianOrUnit: Iterator<Item = Vec<(String, ArgValue)>> + Sized {
    fn multi_cartesian_product_or_unit(self) -> Vec<Vec<(String, ArgValue)>> {
        let factors: Vec<_> = self.collect();
        if factors.is_empty() {
            vec![Vec::new()]
        } else {
            factors.into_iter().multi_cartesian_product().collect()
        }
    }
}

impl<I: Iterator<Item = Vec<(String, ArgValue)>>> CartesianOrUnit for I {}

fn with_counter(aug: &AugmentedContract, mut call: Invocation, st: &InstanceState) -> Invocation {
    if aug.plugins().transition_counter {
        call.counter_arg = Some(st.counter);
    }
    call
}

/// `call` with every reentry choice up to `depth` frames. The nested call
/// comes from the recipient of the first send, at the same time, and is
/// any call of the alphabet.
fn call_trees(
    aug: &AugmentedContract,
    alphabet: &[Invocation],
    st: &InstanceState,
    call: Invocation,
    depth: usize,
) -> Result<Vec<Invocation>, InterpError> {
    let mut out = vec![call.clone()];
    if depth <= 1 {
        return Ok(out);
    }
    let Some((recipient, mid)) = probe_first_send(aug, st, &call)? else {
        return Ok(out);
    };
    let mut nested_calls: Vec<Invocation> = Vec::new();
    for template in alphabet {
        let mut n = template.clone();
        n.env.now = call.env.now;
        n.env.sender = recipient.clone();
        let n = with_counter(aug, n, &mid);
        if !nested_calls.contains(&n) {
            nested_calls.push(n);
        }
    }
    for n in nested_calls {
        for tree in call_trees(aug, alphabet, &mid, n, depth - 1)? {
            out.push(call.clone().with_reentry(tree));
        }
    }
    Ok(out)
}

/// Searches for a reentrancy exploit: a schedule of at most
/// `prefix_len` calls followed by one call whose first send is reentered,
/// where a nested call is accepted while the outer call is still running
/// and the outcome differs from running the same calls without reentry.
///
/// States reached by the prefix are explored breadth first and
/// deduplicated, so the search is exhaustive for the given bounds.
pub fn search_reentrancy(
    aug: &AugmentedContract,
    bounds: &SearchBounds,
) -> Result<Option<ReentrancyWitness>, InterpError> {
    if !(1..=3).contains(&bounds.depth_limit) {
        return Err(InterpError::SearchBounds(format!("depth must be between 1 and 3, got {}", bounds.depth_limit)));
    }
    let Some(creator) = bounds.senders.first() else {
        return Err(InterpError::SearchBounds("at least one sender is required".into()));
    };
    check_interpretable(aug)?;
    let alphabet = alphabet(aug, bounds);
    let start = init_instance(aug, bounds.creation_time, creator)?;

    let mut seen: HashSet<(InstanceState, u64)> = HashSet::new();
    seen.insert((start.clone(), bounds.creation_time));
    let mut frontier = vec![(start, bounds.creation_time, Vec::<Invocation>::new())];
    for level in 0..=bounds.prefix_len {
        for (st, last_now, path) in &frontier {
            for template in alphabet.iter().filter(|t| t.env.now >= *last_now) {
                let call = with_counter(aug, template.clone(), st);
                for tree in call_trees(aug, &alphabet, st, call, bounds.depth_limit)?.into_iter().skip(1) {
                    if let Some(w) = check_witness(aug, bounds, creator, st, path, tree)? {
                        return Ok(Some(w));
                    }
                }
            }
        }
        if level == bounds.prefix_len {
            break;
        }
        let mut next = Vec::new();
        for (st, last_now, path) in &frontier {
            for template in alphabet.iter().filter(|t| t.env.now >= *last_now) {
                let call = with_counter(aug, template.clone(), st);
                let step = invoke(aug, st, &call)?;
                if step.outcome.is_accepted() && seen.insert((step.state.clone(), call.env.now)) {
                    let mut p = path.clone();
                    let now = call.env.now;
                    p.push(call);
                    next.push((step.state, now, p));
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}

fn check_witness(
    aug: &AugmentedContract,
    bounds: &SearchBounds,
    creator: &Address,
    st: &InstanceState,
    path: &[Invocation],
    tree: Invocation,
) -> Result<Option<ReentrancyWitness>, InterpError> {
    let attacked = invoke(aug, st, &tree)?;
    let nested_accepted =
        attacked.outcome.is_accepted() && attacked.entries.iter().any(|e| e.depth > 1 && e.outcome.is_accepted());
    if !nested_accepted {
        return Ok(None);
    }
    let plain = invoke(aug, st, &tree.without_reentry())?;
    if plain.state.observable() == attacked.state.observable() {
        return Ok(None);
    }
    let mut schedule = path.to_vec();
    let mut baseline_schedule = path.to_vec();
    baseline_schedule.push(tree.without_reentry());
    schedule.push(tree);
    Ok(Some(ReentrancyWitness {
        trace: run_schedule(aug, bounds.creation_time, creator, &schedule)?,
        baseline: run_schedule(aug, bounds.creation_time, creator, &baseline_schedule)?,
        schedule,
    }))
}

/// Result of running every ordering of a small batch of calls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderAnalysis {
    /// Every ordering accepts the same calls and ends in the same state.
    Independent,
    /// Two orderings (as permutations of call indices) that disagree on the
    /// accepted calls or on the final state.
    Dependent { first: Vec<usize>, second: Vec<usize>, first_trace: Box<Trace>, second_trace: Box<Trace> },
    /// With the transition counter on: the orderings in which every call was
    /// accepted. Each call carries its declared sequence number.
    CounterEnforced { fully_accepted: Vec<Vec<usize>> },
}

type Summary = (BTreeSet<usize>, String, BTreeMap<String, Value>, U256);

fn summarize(perm: &[usize], trace: &Trace) -> Summary {
    let accepted =
        perm.iter().zip(trace.top_level()).filter(|(_, e)| e.outcome.is_accepted()).map(|(i, _)| *i).collect();
    let (state, store, balance) = trace.final_state.observable();
    (accepted, state.to_string(), store.clone(), balance)
}

/// Runs all orderings of `calls` (at most 4) from a fresh deployment.
///
/// Without the transition counter, reports the first ordering that differs
/// from the declared one. With it, call `i` carries sequence number `i`
/// unless it already has one, and the analysis lists the orderings in which
/// every call is accepted.
pub fn search_order_dependence(
    aug: &AugmentedContract,
    creation_time: u64,
    creator: &Address,
    calls: &[Invocation],
) -> Result<OrderAnalysis, InterpError> {
    if calls.len() > 4 {
        return Err(InterpError::SearchBounds(format!("at most 4 calls, got {}", calls.len())));
    }
    let counter = aug.plugins().transition_counter;
    let numbered: Vec<Invocation> = calls
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut c = c.clone();
            if counter && c.counter_arg.is_none() {
                c.counter_arg = Some(i as u64);
            }
            c
        })
        .collect();
    let run = |perm: &[usize]| -> Result<Trace, InterpError> {
        let ordered: Vec<Invocation> = perm.iter().map(|&i| numbered[i].clone()).collect();
        run_schedule(aug, creation_time, creator, &ordered)
    };
    let perms: Vec<Vec<usize>> = (0..calls.len()).permutations(calls.len()).collect();
    if counter {
        let mut fully_accepted = Vec::new();
        for p in perms {
            if run(&p)?.all_accepted() {
                fully_accepted.push(p);
            }
        }
        return Ok(OrderAnalysis::CounterEnforced { fully_accepted });
    }
    let identity = &perms[0];
    let base = run(identity)?;
    let base_summary = summarize(identity, &base);
    for p in &perms[1..] {
        let t = run(p)?;
        if summarize(p, &t) != base_summary {
            return Ok(OrderAnalysis::Dependent {
                first: identity.clone(),
                second: p.clone(),
                first_trace: Box::new(base),
                second_trace: Box::new(t),
            });
        }
    }
    Ok(OrderAnalysis::Independent)
}
