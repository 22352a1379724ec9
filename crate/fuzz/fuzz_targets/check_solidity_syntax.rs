#![no_main]

use fsmsolc_core::dsl::{check_solidity_syntax, SnippetContext};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(snippet) = std::str::from_utf8(data) else { return };
    check_solidity_syntax(snippet, SnippetContext::ExprContext);
    check_solidity_syntax(snippet, SnippetContext::StmtContext);
});
