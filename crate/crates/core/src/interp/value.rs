//! Runtime values.

use std::collections::BTreeMap;

use primitive_types::U256;
use serde::{Deserialize, Serialize};

use crate::expr::{Address, TypeRef};
use crate::model::Contract;

/// A runtime value. Mappings keep only entries that differ from the default,
/// so two stores with the same observable contents compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Uint(U256),
    Bool(bool),
    Address(Address),
    Bytes32(U256),
    Struct(BTreeMap<String, Value>),
    Array(Vec<Value>),
    Map {
        default: Box<Value>,
        entries: BTreeMap<Value, Value>,
    },
    /// Placeholder for types the interpreter does not model (`int`, `string`).
    /// Core expressions never read these.
    Opaque,
}

impl Value {
    pub fn zero() -> Value {
        Value::Uint(U256::zero())
    }

    pub fn as_uint(&self) -> Option<U256> {
        match self {
            Value::Uint(u) => Some(*u),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_address(&self) -> Option<&Address> {
        match self {
            Value::Address(a) => Some(a),
            _ => None,
        }
    }

    /// Drops mapping entries equal to the mapping default, recursively.
    pub fn normalize(&mut self) {
        match self {
            Value::Map { default, entries } => {
                for v in entries.values_mut() {
                    v.normalize();
                }
                entries.retain(|_, v| v != default.as_ref());
            }
            Value::Struct(fields) => fields.values_mut().for_each(Value::normalize),
            Value::Array(items) => items.iter_mut().for_each(Value::normalize),
            _ => {}
        }
    }

    /// JSON rendering used in traces. Integers that fit in 64 bits become
    /// numbers, larger ones decimal strings; mappings become objects keyed
    /// by the rendered key and list only non-default entries.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value as J;
        match self {
            Value::Uint(u) => uint_json(*u),
            Value::Bool(b) => J::Bool(*b),
            Value::Address(a) => J::String(a.0.clone()),
            Value::Bytes32(b) => J::String(format!("0x{b:064x}")),
            Value::Struct(fields) => J::Object(fields.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()),
            Value::Array(items) => J::Array(items.iter().map(Value::to_json).collect()),
            Value::Map { entries, .. } => J::Object(
                entries
                    .iter()
                    .map(|(k, v)| {
                        let key = match k.to_json() {
                            J::String(s) => s,
                            other => other.to_string(),
                        };
                        (key, v.to_json())
                    })
                    .collect(),
            ),
            Value::Opaque => J::Null,
        }
    }
}

pub(crate) fn uint_json(u: U256) -> serde_json::Value {
    if u.bits() <= 64 {
        serde_json::Value::from(u.low_u64())
    } else {
        serde_json::Value::String(u.to_string())
    }
}

/// Addresses compare case-insensitively when written in hex.
pub fn normalize_address(token: &str) -> Address {
    if token.starts_with("0x") || token.starts_with("0X") {
        Address(token.to_ascii_lowercase())
    } else {
        Address(token.to_string())
    }
}

/// The zero value of `ty`, as storage starts out.
pub fn default_value(ty: &TypeRef, contract: &Contract) -> Value {
    match ty {
        TypeRef::Uint => Value::zero(),
        TypeRef::Bool => Value::Bool(false),
        TypeRef::Address => Value::Address(Address::zero()),
        TypeRef::Bytes32 => Value::Bytes32(U256::zero()),
        TypeRef::Int | TypeRef::String => Value::Opaque,
        TypeRef::Array(_) => Value::Array(Vec::new()),
        TypeRef::Mapping(_, v) => {
            Value::Map { default: Box::new(default_value(v, contract)), entries: BTreeMap::new() }
        }
        TypeRef::Struct(name) => Value::Struct(
            contract
                .struct_decl(name)
                .map(|s| s.fields.iter().map(|f| (f.name.clone(), default_value(&f.ty, contract))).collect())
                .unwrap_or_default(),
        ),
    }
}

/// An argument as written in a schedule file. Numbers above 64 bits are
/// given as decimal or `0x` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArgValue {
    Bool(bool),
    Number(u64),
    Text(String),
    List(Vec<ArgValue>),
}

impl From<u64> for ArgValue {
    fn from(n: u64) -> Self {
        ArgValue::Number(n)
    }
}

impl From<&str> for ArgValue {
    fn from(s: &str) -> Self {
        ArgValue::Text(s.to_string())
    }
}

impl From<bool> for ArgValue {
    fn from(b: bool) -> Self {
        ArgValue::Bool(b)
    }
}

impl From<&Value> for ArgValue {
    fn from(v: &Value) -> Self {
        match v {
            Value::Uint(u) if u.bits() <= 64 => ArgValue::Number(u.low_u64()),
            Value::Uint(u) => ArgValue::Text(u.to_string()),
            Value::Bool(b) => ArgValue::Bool(*b),
            Value::Address(a) => ArgValue::Text(a.0.clone()),
            Value::Bytes32(b) => ArgValue::Text(format!("0x{b:064x}")),
            Value::Array(items) => ArgValue::List(items.iter().map(ArgValue::from).collect()),
            Value::Struct(_) | Value::Map { .. } | Value::Opaque => ArgValue::Text(String::new()),
        }
    }
}

pub(crate) fn parse_uint_text(s: &str) -> Option<U256> {
    let s = s.trim();
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        if hex.is_empty() || hex.len() > 64 {
            return None;
        }
        U256::from_str_radix(hex, 16).ok()
    } else if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
        U256::from_dec_str(s).ok()
    } else {
        None
    }
}

/// Converts a schedule argument to a value of the declared type.
pub fn value_from_arg(arg: &ArgValue, ty: &TypeRef) -> Result<Value, String> {
    match (ty, arg) {
        (TypeRef::Uint, ArgValue::Number(n)) => Ok(Value::Uint((*n).into())),
        (TypeRef::Uint, ArgValue::Text(s)) => {
            parse_uint_text(s).map(Value::Uint).ok_or_else(|| format!("`{s}` is not a uint"))
        }
        (TypeRef::Bool, ArgValue::Bool(b)) => Ok(Value::Bool(*b)),
        (TypeRef::Address, ArgValue::Text(s)) if !s.is_empty() => Ok(Value::Address(normalize_address(s))),
        (TypeRef::Bytes32, ArgValue::Number(n)) => Ok(Value::Bytes32((*n).into())),
        (TypeRef::Bytes32, ArgValue::Text(s)) => {
            parse_uint_text(s).map(Value::Bytes32).ok_or_else(|| format!("`{s}` is not a bytes32"))
        }
        (TypeRef::Array(inner), ArgValue::List(items)) => {
            items.iter().map(|i| value_from_arg(i, inner)).collect::<Result<_, _>>().map(Value::Array)
        }
        (TypeRef::Int | TypeRef::String, _) => Err(format!("arguments of type `{ty}` cannot be interpreted")),
        _ => Err(format!("argument does not match type `{ty}`")),
    }
}
