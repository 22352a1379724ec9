#![no_main]

use std::sync::OnceLock;

use fsmsolc_core::dsl::parse_contract;
use fsmsolc_core::expr::Address;
use fsmsolc_core::interp::{parse_schedule, run_schedule};
use fsmsolc_core::weave::{apply_plugins, AugmentedContract};
use libfuzzer_sys::fuzz_target;

const SOURCE: &str = include_str!("../../crates/core/fixtures/blind_auction_vulnerable.fsm");

fn contract() -> &'static AugmentedContract {
    static AUG: OnceLock<AugmentedContract> = OnceLock::new();
    AUG.get_or_init(|| {
        let c = parse_contract(SOURCE).expect("fixture parses");
        apply_plugins(&c, "locking,counter".parse().unwrap()).expect("fixture weaves")
    })
}

// Arbitrary schedule JSON is either refused with a tooling error or run to
// completion, and an instance is never left locked.
fuzz_target!(|data: &[u8]| {
    let Ok(json) = std::str::from_utf8(data) else { return };
    let Ok(calls) = parse_schedule(json) else { return };
    let creator = Address::new("0x00000000000000000000000000000000000000a1");
    if let Ok(trace) = run_schedule(contract(), 1_000, &creator, &calls) {
        assert!(!trace.final_state.locked);
    }
});
