#![allow(dead_code)]

pub mod gen;

use fsmsolc_core::dsl::parse_contract;
use fsmsolc_core::expr::Address;
use fsmsolc_core::interp::Invocation;
use fsmsolc_core::weave::{apply_plugins, AugmentedContract, PluginSet};
use fsmsolc_core::Contract;

pub const CREATED: u64 = 1_000;
pub const FIVE_DAYS: u64 = 5 * 86_400;
pub const ALICE: &str = "0x00000000000000000000000000000000000000a1";
pub const BOB: &str = "0x00000000000000000000000000000000000000b2";

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn load(name: &str) -> Contract {
    let src = std::fs::read_to_string(fixture_path(name)).unwrap();
    parse_contract(&src).unwrap_or_else(|d| panic!("{name}: {d:?}"))
}

pub fn woven(name: &str, plugins: &str) -> AugmentedContract {
    apply_plugins(&load(name), plugins.parse::<PluginSet>().unwrap()).unwrap()
}

pub fn alice() -> Address {
    Address::new(ALICE)
}

pub fn bid(now: u64, sender: &str, value: u64) -> Invocation {
    Invocation::new("bid", now, sender).with_value(value).with_arg("blindedBid", 0u64)
}

pub fn call(name: &str, now: u64, sender: &str) -> Invocation {
    Invocation::new(name, now, sender)
}
