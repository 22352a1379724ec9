//! Guard and statement representation shared by the front end, the emitter
//! and the interpreter.
//!
//! Every expression keeps its canonical source text, which is what the
//! emitter writes out. Expressions that fall inside the interpretable core
//! additionally carry a typed [`CoreExpr`] tree; everything else is opaque
//! Solidity that has only been syntax-checked.

use std::fmt;

use primitive_types::U256;
use serde::{Deserialize, Serialize};

/// Type of a variable, parameter or struct field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeRef {
    Uint,
    Int,
    Bool,
    Address,
    Bytes32,
    String,
    Mapping(Box<TypeRef>, Box<TypeRef>),
    Array(Box<TypeRef>),
    Struct(String),
}

impl TypeRef {
    pub fn elementary(name: &str) -> Option<TypeRef> {
        Some(match name {
            "uint" => TypeRef::Uint,
            "int" => TypeRef::Int,
            "bool" => TypeRef::Bool,
            "address" => TypeRef::Address,
            "bytes32" => TypeRef::Bytes32,
            "string" => TypeRef::String,
            _ => return None,
        })
    }

    /// Value types that can be compared with `==` and used as mapping keys.
    pub fn is_value_type(&self) -> bool {
        matches!(self, TypeRef::Uint | TypeRef::Int | TypeRef::Bool | TypeRef::Address | TypeRef::Bytes32)
    }

    /// Calls `f` on every struct name this type mentions.
    pub fn for_each_struct(&self, f: &mut impl FnMut(&str)) {
        match self {
            TypeRef::Struct(name) => f(name),
            TypeRef::Mapping(k, v) => {
                k.for_each_struct(f);
                v.for_each_struct(f);
            }
            TypeRef::Array(e) => e.for_each_struct(f),
            _ => {}
        }
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Uint => f.write_str("uint"),
            TypeRef::Int => f.write_str("int"),
            TypeRef::Bool => f.write_str("bool"),
            TypeRef::Address => f.write_str("address"),
            TypeRef::Bytes32 => f.write_str("bytes32"),
            TypeRef::String => f.write_str("string"),
            TypeRef::Mapping(k, v) => write!(f, "mapping({k} => {v})"),
            TypeRef::Array(e) => write!(f, "{e}[]"),
            TypeRef::Struct(name) => f.write_str(name),
        }
    }
}

/// An account identity. Addresses are opaque tokens: the interpreter only
/// compares them for equality and orders them for deterministic maps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(pub String);

impl Address {
    pub fn new(token: impl Into<String>) -> Self {
        Address(token.into())
    }

    pub fn zero() -> Self {
        Address("0x0000000000000000000000000000000000000000".to_string())
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn from_symbol(op: &str) -> Option<Self> {
        Some(match op {
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "*" => BinaryOp::Mul,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Le,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Ge,
            "&&" => BinaryOp::And,
            "||" => BinaryOp::Or,
            _ => return None,
        })
    }
}

/// Interpretable expression tree. Duration literals are already folded to
/// seconds; parentheses are implicit in the tree shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreExpr {
    Uint(U256),
    Bool(bool),
    Address(Address),
    Var(String),
    Now,
    MsgSender,
    MsgValue,
    Index(Box<CoreExpr>, Box<CoreExpr>),
    Member(Box<CoreExpr>, String),
    Length(Box<CoreExpr>),
    Unary(UnaryOp, Box<CoreExpr>),
    Binary(BinaryOp, Box<CoreExpr>, Box<CoreExpr>),
    StructLit { name: String, fields: Vec<(String, CoreExpr)> },
}

impl CoreExpr {
    /// Root variable of an lvalue-shaped expression.
    pub fn root_var(&self) -> Option<&str> {
        match self {
            CoreExpr::Var(name) => Some(name),
            CoreExpr::Index(base, _) | CoreExpr::Member(base, _) => base.root_var(),
            _ => None,
        }
    }

    pub fn visit(&self, f: &mut impl FnMut(&CoreExpr)) {
        f(self);
        match self {
            CoreExpr::Index(a, b) | CoreExpr::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            CoreExpr::Member(a, _) | CoreExpr::Length(a) | CoreExpr::Unary(_, a) => a.visit(f),
            CoreExpr::StructLit { fields, .. } => fields.iter().for_each(|(_, e)| e.visit(f)),
            _ => {}
        }
    }
}

/// A guard or initializer expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expression {
    Core { text: String, ast: CoreExpr },
    Opaque { text: String },
}

impl Expression {
    pub fn text(&self) -> &str {
        match self {
            Expression::Core { text, .. } | Expression::Opaque { text } => text,
        }
    }

    pub fn is_core(&self) -> bool {
        matches!(self, Expression::Core { .. })
    }

    pub fn core(&self) -> Option<&CoreExpr> {
        match self {
            Expression::Core { ast, .. } => Some(ast),
            Expression::Opaque { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    Assign {
        target: CoreExpr,
        value: CoreExpr,
    },
    /// `target.push(value)` on an array, typically a mapping-of-arrays entry.
    MappingPush {
        target: CoreExpr,
        value: CoreExpr,
    },
    /// `recipient.transfer(amount)`: the only external control transfer.
    Send {
        recipient: CoreExpr,
        amount: CoreExpr,
    },
    Opaque,
}

/// A transition action. `text` is canonical Solidity without the trailing `;`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub text: String,
    pub kind: StatementKind,
}

impl Statement {
    pub fn is_core(&self) -> bool {
        !matches!(self.kind, StatementKind::Opaque)
    }

    pub fn is_send(&self) -> bool {
        matches!(self.kind, StatementKind::Send { .. })
    }
}
