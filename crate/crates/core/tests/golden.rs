//! Golden Solidity output for the canonical fixture under every plugin
//! combination. Run with `UPDATE_GOLDEN=1` to regenerate the files.

mod common;

use fsmsolc_core::emit::{emit_solidity, structural_check, EmitOptions};
use fsmsolc_core::weave::{apply_plugins, PluginSet};

fn golden_path(plugins: PluginSet) -> String {
    format!("{}/tests/golden/{}.sol", env!("CARGO_MANIFEST_DIR"), plugins.label())
}

#[test]
fn fixture_matches_golden_for_all_plugin_sets() {
    let contract = common::load("blind_auction.fsm");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let all: Vec<_> = PluginSet::all().collect();
    assert_eq!(all.len(), 16);
    for plugins in all {
        let aug = apply_plugins(&contract, plugins).unwrap_or_else(|d| panic!("{plugins}: {d:?}"));
        let sol = emit_solidity(&aug, &EmitOptions::default()).unwrap();
        assert_eq!(sol, emit_solidity(&aug, &EmitOptions::default()).unwrap(), "{plugins}: nondeterministic");
        let diags = structural_check(&sol, &aug);
        assert!(diags.is_empty(), "{plugins}: {diags:?}");
        for t in &contract.transitions {
            for g in &t.guards {
                assert!(sol.contains(g.text()), "{plugins}: guard `{}` not preserved", g.text());
            }
            for s in &t.statements {
                assert!(sol.contains(&s.text), "{plugins}: statement `{}` not preserved", s.text);
            }
        }
        let path = golden_path(plugins);
        if update {
            std::fs::write(&path, &sol).unwrap();
        } else {
            let expected = std::fs::read_to_string(&path)
                .unwrap_or_else(|e| panic!("{path}: {e} (run with UPDATE_GOLDEN=1 to create)"));
            assert_eq!(sol, expected, "{plugins}: output differs from {path}");
        }
    }
}
