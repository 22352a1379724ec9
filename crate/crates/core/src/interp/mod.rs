//! Abstract interpreter for woven contracts.
//!
//! Calls run with transaction semantics: any rejection restores the state
//! the call started from. A call may carry a reentrant call that the
//! recipient of its first send makes back into the contract; a rejected
//! reentrant call is undone on its own and the outer call carries on, as a
//! failed external call that the caller does not check would.

mod exec;
mod search;
pub mod value;

use serde::Serialize;

pub use exec::{
    check_function_interpretable, check_interpretable, init_instance, invoke, run_from, run_schedule, Env,
    InstanceState, Invocation, Outcome, Step, Trace, TraceEntry,
};
pub use search::{search_order_dependence, search_reentrancy, OrderAnalysis, ReentrancyWitness, SearchBounds};
pub use value::{ArgValue, Value};

/// Why the modelled contract refused a call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RejectCode {
    #[serde(rename = "R_LOCKED")]
    Locked,
    #[serde(rename = "R_BAD_COUNTER")]
    BadCounter,
    #[serde(rename = "R_NOT_ADMIN")]
    NotAdmin,
    #[serde(rename = "R_WRONG_STATE")]
    WrongState,
    #[serde(rename = "R_GUARD_FALSE")]
    GuardFalse,
    #[serde(rename = "R_NOT_PAYABLE")]
    NotPayable,
    #[serde(rename = "R_OVERFLOW")]
    Overflow,
    #[serde(rename = "R_INSUFFICIENT_BALANCE")]
    InsufficientBalance,
    /// Array index past the end.
    #[serde(rename = "R_OUT_OF_BOUNDS")]
    OutOfBounds,
    /// `removeAdmin` on the only remaining administrator.
    #[serde(rename = "E_LAST_ADMIN")]
    LastAdmin,
    /// The call succeeded on its own but an enclosing call was rejected,
    /// which undid it.
    #[serde(rename = "R_REVERTED_BY_CALLER")]
    RevertedByCaller,
}

impl RejectCode {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectCode::Locked => "R_LOCKED",
            RejectCode::BadCounter => "R_BAD_COUNTER",
            RejectCode::NotAdmin => "R_NOT_ADMIN",
            RejectCode::WrongState => "R_WRONG_STATE",
            RejectCode::GuardFalse => "R_GUARD_FALSE",
            RejectCode::NotPayable => "R_NOT_PAYABLE",
            RejectCode::Overflow => "R_OVERFLOW",
            RejectCode::InsufficientBalance => "R_INSUFFICIENT_BALANCE",
            RejectCode::OutOfBounds => "R_OUT_OF_BOUNDS",
            RejectCode::LastAdmin => "E_LAST_ADMIN",
            RejectCode::RevertedByCaller => "R_REVERTED_BY_CALLER",
        }
    }
}

impl std::fmt::Display for RejectCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A limitation of the tool, as opposed to a modelled rejection.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterpError {
    #[error("{path}: `{text}` is outside the interpretable subset")]
    Uninterpretable { path: String, text: String },
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("bad arguments for `{transition}`: {detail}")]
    BadArgs { transition: String, detail: String },
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
    #[error("initializer of `{variable}` fails with {code}")]
    Deployment { variable: String, code: RejectCode },
    #[error("invalid search bounds: {0}")]
    SearchBounds(String),
}

impl InterpError {
    pub fn code(&self) -> &'static str {
        match self {
            InterpError::Uninterpretable { .. } => "E_UNINTERPRETABLE",
            InterpError::UnknownTransition(_) => "E_UNKNOWN_TRANSITION",
            InterpError::BadArgs { .. } => "E_BAD_ARGS",
            InterpError::BadSchedule(_) => "E_BAD_SCHEDULE",
            InterpError::Deployment { .. } => "E_DEPLOYMENT",
            InterpError::SearchBounds(_) => "E_SEARCH_BOUNDS",
        }
    }
}

/// Internal control flow: a modelled rejection or a tooling error.
#[derive(Debug)]
enum Fault {
    Reject(RejectCode),
    Error(InterpError),
}

/// Parses a schedule file: a JSON array of invocation records.
pub fn parse_schedule(json: &str) -> Result<Vec<Invocation>, InterpError> {
    serde_json::from_str(json).map_err(|e| InterpError::BadSchedule(e.to_string()))
}
