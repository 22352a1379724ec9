//! Compiler toolchain for smart contracts written as finite state machines.
//!
//! The pipeline is: [`dsl::parse_contract`] → [`validate::validate`] →
//! [`weave::apply_plugins`] → [`emit::emit_solidity`]. The [`interp`] module
//! executes woven contracts abstractly and searches for reentrancy and
//! transaction-ordering problems; [`gas`] predicts plugin overheads from
//! calibration data.

pub mod diag;
pub mod dsl;
pub mod emit;
pub mod expr;
pub mod gas;
pub mod interp;
pub mod model;
pub mod validate;
pub mod weave;

pub use diag::{Diagnostic, Severity};
pub use model::Contract;
