#![no_main]

use fsmsolc_core::dsl::{parse_contract, serialize_contract};
use fsmsolc_core::validate::validate;
use libfuzzer_sys::fuzz_target;

// Parsing never panics, and every contract that validates cleanly
// round-trips through its canonical text.
fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(contract) = parse_contract(src) else { return };
    let diags = validate(&contract);
    for d in diags.iter().filter(|d| d.is_error()) {
        assert!(contract.resolves(&d.node_path), "{d}");
    }
    if diags.iter().any(|d| d.is_error()) {
        return;
    }
    let text = serialize_contract(&contract).expect("valid contract serializes");
    let again = parse_contract(&text).expect("canonical text parses");
    assert_eq!(again, contract);
});
