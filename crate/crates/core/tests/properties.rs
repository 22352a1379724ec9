//! Property tests over random contracts and random call schedules.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::gen::{funded_auction, random_contract_source, random_run, RunStep};
use common::{alice, load, woven, CREATED, FIVE_DAYS};
use fsmsolc_core::dsl::{parse_contract, serialize_contract};
use fsmsolc_core::interp::{init_instance, invoke, Invocation, Outcome, RejectCode};
use fsmsolc_core::model::Transition;
use fsmsolc_core::validate::{reachable_states, validate};
use fsmsolc_core::weave::{AugmentedContract, PluginSet};

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A random run from deployment for even seeds and from a funded, finished
/// auction for odd ones.
fn run(aug: &AugmentedContract, seed: u64, len: usize) -> Vec<RunStep> {
    if seed.is_multiple_of(2) {
        fresh_run(aug, seed, len)
    } else {
        random_run(&mut rng(seed), aug, funded_auction(aug), CREATED + FIVE_DAYS, len)
    }
}

fn fresh_run(aug: &AugmentedContract, seed: u64, len: usize) -> Vec<RunStep> {
    let start = init_instance(aug, CREATED, &alice()).unwrap();
    random_run(&mut rng(seed), aug, start, CREATED, len)
}

/// Plugin sets under which the plain fixture is woven, indexed 0..16.
fn plugin_set(i: usize) -> PluginSet {
    PluginSet::all().nth(i).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_contracts_round_trip(seed in any::<u64>()) {
        let src = random_contract_source(&mut rng(seed));
        let c = parse_contract(&src).unwrap_or_else(|d| panic!("{src}\n{d:?}"));
        let errors: Vec<_> = validate(&c).into_iter().filter(|d| d.is_error()).collect();
        prop_assert!(errors.is_empty(), "{}\n{:?}", src, errors);
        let text = serialize_contract(&c).unwrap();
        let again = parse_contract(&text).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(serialize_contract(&again).unwrap(), text);
    }

    #[test]
    fn validate_is_deterministic(seed in any::<u64>()) {
        let c = parse_contract(&random_contract_source(&mut rng(seed))).unwrap();
        prop_assert_eq!(validate(&c), validate(&c.clone()));
    }

    #[test]
    fn error_paths_resolve_in_mutated_fixtures(line in 0usize..200, word in 0usize..400, replacement in "[a-zA-Z]{1,6}", kind in 0u8..3) {
        let src = std::fs::read_to_string(common::fixture_path("blind_auction.fsm")).unwrap();
        let mutated = mutate(&src, kind, line, word, &replacement);
        if let Ok(c) = parse_contract(&mutated) {
            for d in validate(&c).into_iter().filter(|d| d.is_error()) {
                prop_assert!(c.resolves(&d.node_path), "{} does not resolve in\n{}", d, mutated);
            }
        }
    }

    #[test]
    fn reachable_states_is_monotone(seed in any::<u64>(), from in 0usize..5, to in 0usize..5) {
        let mut c = parse_contract(&random_contract_source(&mut rng(seed))).unwrap();
        let before = reachable_states(&c).unwrap();
        let names: Vec<String> = c.states.iter().map(|s| s.name.clone()).collect();
        c.transitions.push(Transition {
            name: "extraEdge".into(),
            from: names[from % names.len()].clone(),
            to: names[to % names.len()].clone(),
            guards: Vec::new(),
            input: Vec::new(),
            output: Vec::new(),
            statements: Vec::new(),
            tags: Default::default(),
        });
        let after = reachable_states(&c).unwrap();
        prop_assert!(before.is_subset(&after));
    }
}

/// Deletes a line (`kind` 0), replaces a word (1) or duplicates a line (2).
fn mutate(src: &str, kind: u8, line: usize, word: usize, replacement: &str) -> String {
    let mut lines: Vec<String> = src.lines().map(String::from).collect();
    let i = line % lines.len();
    match kind {
        0 => {
            lines.remove(i);
        }
        1 => {
            let words: Vec<&str> = src.split_whitespace().collect();
            let target = words[word % words.len()].trim_end_matches(';');
            if !target.is_empty() {
                return src.replacen(target, replacement, 1);
            }
        }
        _ => {
            let dup = lines[i].clone();
            lines.insert(i, dup);
        }
    }
    lines.join("\n")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rejected_invocations_leave_state_unchanged(seed in any::<u64>(), set in 0usize..16) {
        let aug = woven("blind_auction.fsm", &plugin_set(set).label().replace("none", ""));
        for s in run(&aug, seed, 16) {
            if !s.step.outcome.is_accepted() {
                prop_assert_eq!(&s.step.state, &s.pre, "{:?}", s.call);
            }
            prop_assert!(!s.step.state.locked);
        }
    }

    #[test]
    fn locking_prevents_accepted_nesting(seed in any::<u64>()) {
        for name in ["blind_auction.fsm", "blind_auction_vulnerable.fsm"] {
            let aug = woven(name, "locking");
            for s in run(&aug, seed, 16) {
                for e in &s.step.entries {
                    prop_assert!(e.depth == 1 || !e.outcome.is_accepted(), "{:?}", s.step.entries);
                }
            }
        }
    }

    #[test]
    fn counter_sequences_accepted_calls(seed in any::<u64>(), locking in any::<bool>()) {
        let plugins = if locking { "locking,counter" } else { "counter" };
        let aug = woven("blind_auction_vulnerable.fsm", plugins);
        let steps = run(&aug, seed, 16);
        let args: Vec<u64> = steps
            .iter()
            .flat_map(|s| &s.step.entries)
            .filter(|e| e.outcome.is_accepted())
            .map(|e| e.invocation.counter_arg.unwrap())
            .collect();
        let first = steps[0].pre.counter;
        let expected: Vec<u64> = (first..first + args.len() as u64).collect();
        prop_assert_eq!(&args, &expected);
        prop_assert_eq!(steps.last().unwrap().step.state.counter, first + args.len() as u64);
    }

    #[test]
    fn only_admins_run_admin_transitions(seed in any::<u64>(), locking in any::<bool>()) {
        let plugins = if locking { "locking,access" } else { "access" };
        let aug = woven("blind_auction_admin.fsm", plugins);
        for s in run(&aug, seed, 16) {
            for e in s.step.entries.iter().filter(|e| e.outcome.is_accepted()) {
                let f = aug.function(&e.invocation.transition).unwrap();
                if f.tags().admin {
                    let sender = fsmsolc_core::expr::Address::new(e.invocation.env.sender.0.clone());
                    prop_assert!(s.pre.admin_set.contains(&sender), "{:?} by non-admin", e.invocation);
                }
            }
            prop_assert!(!s.step.state.admin_set.is_empty());
        }
    }

    #[test]
    fn value_only_reaches_payable_transitions(seed in any::<u64>()) {
        let aug = woven("blind_auction.fsm", "");
        for s in run(&aug, seed, 16) {
            for e in s.step.entries.iter().filter(|e| e.outcome.is_accepted()) {
                let f = aug.function(&e.invocation.transition).unwrap();
                prop_assert!(e.invocation.env.value.is_zero() || f.tags().payable);
            }
        }
    }

    #[test]
    fn timed_transitions_fire_in_time_order(seed in any::<u64>(), a in 0u64..10, b in 0u64..10) {
        // Two chained timed transitions ABB -> RB -> F with independent times.
        let src = std::fs::read_to_string(common::fixture_path("blind_auction_timed.fsm")).unwrap();
        let src = src.replace("time 5 days;", &format!("time {a} days;"));
        let src = src.trim_end().trim_end_matches('}').to_string()
            + &format!("\n    timed transition autoFinish {{\n        from RB;\n        to F;\n        time {b} days;\n    }}\n}}\n");
        let c = parse_contract(&src).unwrap();
        let aug = fsmsolc_core::weave::apply_plugins(&c, "timed".parse().unwrap()).unwrap();
        let times: BTreeMap<&str, u64> = c.timed_transitions.iter().map(|t| (t.name.as_str(), t.time)).collect();
        for s in fresh_run(&aug, seed, 12) {
            for e in &s.step.entries {
                if let Outcome::Accepted { auto_fired, .. } = &e.outcome {
                    let ts: Vec<u64> = auto_fired.iter().map(|n| times[n.as_str()]).collect();
                    prop_assert!(ts.windows(2).all(|w| w[0] <= w[1]), "{:?}", auto_fired);
                }
            }
        }
    }

    #[test]
    fn bids_after_auto_close_are_rejected(offsets in prop::collection::vec(0u64..2 * FIVE_DAYS, 1..8), locking in any::<bool>()) {
        let plugins = if locking { "locking,timed" } else { "timed" };
        let aug = woven("blind_auction_timed.fsm", plugins);
        let mut st = init_instance(&aug, CREATED, &alice()).unwrap();
        let mut offsets = offsets;
        offsets.sort_unstable();
        for off in offsets {
            let now = CREATED + off;
            let step = invoke(&aug, &st, &common::bid(now, common::BOB, 1)).unwrap();
            if off >= FIVE_DAYS {
                prop_assert_eq!(step.outcome.rejection(), Some(RejectCode::WrongState));
            } else {
                prop_assert!(step.outcome.is_accepted());
                prop_assert_eq!(step.state.current_state.as_str(), "ABB");
            }
            st = step.state;
        }
    }
}

#[test]
fn unused_reentry_is_ignored() {
    let aug = woven("blind_auction.fsm", "");
    let st = init_instance(&aug, CREATED, &alice()).unwrap();
    let call: Invocation = common::bid(CREATED, common::BOB, 1).with_reentry(common::bid(CREATED, common::ALICE, 1));
    let step = invoke(&aug, &st, &call).unwrap();
    assert_eq!(step.entries.len(), 1);
    assert!(step.outcome.is_accepted());
}

#[test]
fn fixture_round_trips() {
    let c = load("blind_auction.fsm");
    let text = serialize_contract(&c).unwrap();
    assert_eq!(parse_contract(&text).unwrap(), c);
    assert_eq!(serialize_contract(&parse_contract(&text).unwrap()).unwrap(), text);
}
