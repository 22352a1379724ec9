//! Gas model checks against an independent copy of the published tables.

use std::collections::BTreeMap;

use fsmsolc_core::gas::{check_calibration, estimate, GasCalibration, DEFAULT_TOLERANCE};
use fsmsolc_core::weave::PluginSet;
use proptest::prelude::*;

const NAMES: [&str; 7] = ["bid", "cancelABB", "unbid", "close", "reveal", "finish", "withdraw"];
const NONE: [i64; 7] = [58249, 42059, 19735, 42162, 65729, 27239, 20290];
const LOCKING: [i64; 7] = [68917, 52727, 30406, 52830, 76415, 37913, 30961];
const COUNTER: [i64; 7] = [63924, 47661, 25406, 47764, 71390, 32891, 25961];
const BOTH: [i64; 7] = [74607, 58329, 36074, 58432, 82067, 43559, 36629];

fn spread(col: &[i64; 7]) -> i64 {
    let o: Vec<i64> = (0..7).map(|i| col[i] - NONE[i]).collect();
    o.iter().max().unwrap() - o.iter().min().unwrap()
}

#[test]
fn embedded_tables_match_published_figures() {
    let cal = GasCalibration::embedded();
    for (i, n) in NAMES.iter().enumerate() {
        assert_eq!(cal.transaction_costs.none[*n] as i64, NONE[i]);
        assert_eq!(cal.transaction_costs.locking[*n] as i64, LOCKING[i]);
        assert_eq!(cal.transaction_costs.counter[*n] as i64, COUNTER[i]);
        assert_eq!(cal.transaction_costs.both[*n] as i64, BOTH[i]);
    }
    assert_eq!(
        (cal.per_transition_overhead.locking, cal.per_transition_overhead.counter, cal.per_transition_overhead.both),
        (10_672, 5_648, 16_319)
    );
    assert_eq!(cal.deployment_base, 504_672);
    assert_eq!(
        (cal.deployment_by_plugins.locking, cal.deployment_by_plugins.counter, cal.deployment_by_plugins.both),
        (577_514, 562_800, 637_518)
    );
}

#[test]
fn locking_spread_matches_stated_range() {
    let o: Vec<i64> = (0..7).map(|i| LOCKING[i] - NONE[i]).collect();
    assert_eq!(*o.iter().min().unwrap(), 10_668);
    assert_eq!(*o.iter().max().unwrap(), 10_686);
    let report = check_calibration(&GasCalibration::embedded(), DEFAULT_TOLERANCE);
    let c = report.check("spread/locking").unwrap();
    assert!(c.passed, "{}", c.detail);
}

#[test]
fn spreads_reported_as_measured() {
    let report = check_calibration(&GasCalibration::embedded(), DEFAULT_TOLERANCE);
    for (name, col) in [("locking", &LOCKING), ("counter", &COUNTER), ("both", &BOTH)] {
        let c = report.check(&format!("spread/{name}")).unwrap();
        let s = spread(col);
        assert!(c.detail.contains(&format!("spread {s} ")), "{}", c.detail);
        assert_eq!(c.passed, s <= 20);
    }
}

#[test]
fn additivity_within_tolerance() {
    let report = check_calibration(&GasCalibration::embedded(), DEFAULT_TOLERANCE);
    for (i, n) in NAMES.iter().enumerate() {
        let residual = (BOTH[i] - NONE[i]) - (LOCKING[i] - NONE[i]) - (COUNTER[i] - NONE[i]);
        let c = report.check(&format!("additivity/{n}")).unwrap();
        assert!(c.detail.contains(&format!("= {residual} ")), "{}", c.detail);
        assert_eq!(c.passed, residual.abs() <= 25);
        assert!(c.passed);
    }
    assert_eq!(report.deployment_residual, (637_518 - 504_672) - (577_514 - 504_672) - (562_800 - 504_672));
    assert_eq!(report.deployment_residual, 132_846 - 130_970);
}

#[test]
fn stated_percentages_round_correctly() {
    let unbid = (30_406.0 - 19_735.0) / 19_735.0 * 100.0_f64;
    let reveal = (76_415.0 - 65_729.0) / 65_729.0 * 100.0_f64;
    assert_eq!((unbid.round(), reveal.round()), (54.0, 16.0));
    let report = check_calibration(&GasCalibration::embedded(), DEFAULT_TOLERANCE);
    assert!(report.check("percent/unbid").unwrap().passed);
    assert!(report.check("percent/reveal").unwrap().passed);
}

#[test]
fn estimates_close_to_measurements() {
    let cal = GasCalibration::embedded();
    let lock = estimate(&cal, cal.baseline(), "locking".parse().unwrap()).unwrap();
    assert_eq!(lock.per_transition["unbid"], 19_735 + 10_672);
    assert!((lock.per_transition["unbid"] as i64 - 30_406).abs() <= 20);
    let both = estimate(&cal, cal.baseline(), "locking,counter".parse().unwrap()).unwrap();
    assert_eq!(both.per_transition["reveal"], 65_729 + 16_319);
    assert!((both.per_transition["reveal"] as i64 - 82_067).abs() <= 20);
    assert_eq!(both.deployment, 637_518);
    let none = estimate(&cal, cal.baseline(), PluginSet::NONE).unwrap();
    assert_eq!(&none.per_transition, cal.baseline());
    assert_eq!(none.deployment, 504_672);
}

proptest! {
    #[test]
    fn estimate_is_baseline_plus_constant(costs in proptest::collection::btree_map("[a-z]{1,8}", 0u64..1_000_000, 0..10),
                                          bits in 0u8..4) {
        let cal = GasCalibration::embedded();
        let plugins = PluginSet { locking: bits & 1 != 0, transition_counter: bits & 2 != 0, ..PluginSet::NONE };
        let e = estimate(&cal, &costs, plugins).unwrap();
        let zero = estimate(&cal, &BTreeMap::new(), plugins).unwrap();
        prop_assert!(zero.per_transition.is_empty());
        let deltas: Vec<u64> = costs.iter().map(|(k, v)| e.per_transition[k] - v).collect();
        prop_assert!(deltas.windows(2).all(|w| w[0] == w[1]));
        if bits == 0 {
            prop_assert_eq!(&e.per_transition, &costs);
        }
    }
}
