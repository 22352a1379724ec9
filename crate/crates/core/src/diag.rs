//! Diagnostics produced by parsing, validation, weaving and emission.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

/// A single finding, anchored at a node of the contract tree.
///
/// `node_path` uses slash-separated collection/name/index segments, e.g.
/// `transitions/close/guards/0`. Parse errors, which have no tree yet, use
/// `source/<line>:<column>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    #[serde(rename = "nodePath")]
    pub node_path: String,
}

impl Diagnostic {
    pub fn error(code: &'static str, node_path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, code, message: message.into(), node_path: node_path.into() }
    }

    pub fn warning(code: &'static str, node_path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, code, message: message.into(), node_path: node_path.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}] {}: {}", self.code, self.node_path, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// Diagnostic codes. Kept as constants so tests and callers can match on them.
pub mod codes {
    pub const E_PARSE: &str = "E_PARSE";
    pub const E_DUPLICATE_NAME: &str = "E_DUPLICATE_NAME";
    pub const E_INITIAL_COUNT: &str = "E_INITIAL_COUNT";
    pub const E_UNKNOWN_STATE: &str = "E_UNKNOWN_STATE";
    pub const E_UNKNOWN_SYMBOL: &str = "E_UNKNOWN_SYMBOL";
    pub const E_UNKNOWN_TYPE: &str = "E_UNKNOWN_TYPE";
    pub const E_UNSUPPORTED_TYPE: &str = "E_UNSUPPORTED_TYPE";
    pub const E_GUARD_TYPE: &str = "E_GUARD_TYPE";
    pub const E_TYPE: &str = "E_TYPE";
    pub const E_TIMED_IO: &str = "E_TIMED_IO";
    pub const E_INVALID_NAME: &str = "E_INVALID_NAME";
    pub const E_VISIBILITY: &str = "E_VISIBILITY";
    pub const W_UNREACHABLE: &str = "W_UNREACHABLE";
    pub const E_PLUGIN_REQUIRED: &str = "E_PLUGIN_REQUIRED";
    pub const E_PLUGIN_CONFLICT: &str = "E_PLUGIN_CONFLICT";
    pub const E_INVALID_CONTRACT: &str = "E_INVALID_CONTRACT";
    pub const E_EMIT_UNSUPPORTED: &str = "E_EMIT_UNSUPPORTED";
    pub const E_STRUCT_PRAGMA: &str = "E_STRUCT_PRAGMA";
    pub const E_STRUCT_ENUM: &str = "E_STRUCT_ENUM";
    pub const E_STRUCT_FUNCTION: &str = "E_STRUCT_FUNCTION";
    pub const E_STRUCT_STATE_REQUIRE: &str = "E_STRUCT_STATE_REQUIRE";
    pub const E_STRUCT_MODIFIER_ORDER: &str = "E_STRUCT_MODIFIER_ORDER";
    pub const E_STRUCT_STATE_WRITE: &str = "E_STRUCT_STATE_WRITE";
}
