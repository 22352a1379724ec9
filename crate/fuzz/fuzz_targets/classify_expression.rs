#![no_main]

use fsmsolc_core::dsl::{classify_expression, SymbolEnv};
use fsmsolc_core::expr::{CoreExpr, TypeRef};
use libfuzzer_sys::fuzz_target;

// Classification never panics and never yields a core expression that
// mentions an identifier the environment does not know.
fuzz_target!(|data: &[u8]| {
    let Ok(snippet) = std::str::from_utf8(data) else { return };
    let env = SymbolEnv::new()
        .with_var("highestBid", TypeRef::Uint)
        .with_var("open", TypeRef::Bool)
        .with_var("owner", TypeRef::Address)
        .with_var("creationTime", TypeRef::Uint)
        .with_var("pendingReturns", TypeRef::Mapping(Box::new(TypeRef::Address), Box::new(TypeRef::Uint)));
    let e = classify_expression(snippet, &env);
    if let Some(core) = e.core() {
        core.visit(&mut |node| {
            if let CoreExpr::Var(name) = node {
                assert!(env.knows(name), "unresolved `{name}` in {snippet}");
            }
        });
    }
});
