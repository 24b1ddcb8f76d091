//! MiniC frontend: lexing, parsing, type checking, and lowering.
//!
//! The pipeline is `source -> Ast -> TypedProgram -> IrProgram`:
//!
//! * [`parse`] builds the untyped [`ast::Ast`] the analyzer also walks;
//! * [`check`] resolves names, enforces the conversion lattice
//!   (char < int < float < double, with long and pointer values kept on
//!   the traditional side), and assigns static addresses;
//! * [`lower`] flattens the typed program into virtual-register IR,
//!   inlining every call.
//!
//! [`interp`] evaluates the typed program directly and is the reference
//! oracle the lowering is tested against.

pub mod ast;
pub mod interp;
pub mod lexer;
pub mod lower;
pub mod parser;
pub mod types;

use lexer::Pos;
use thiserror::Error;

pub use interp::{interpret, InterpLimits};
pub use lower::{lower, LowerOptions};
pub use parser::parse;
pub use types::{check, TypedProgram};

/// Everything the frontend can reject a program for.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontendError {
    /// Malformed source: lexical or grammatical.
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    /// Recognizably C, but outside this language (goto, casts, ...).
    #[error("{pos}: unsupported construct: {what}")]
    Unsupported { pos: Pos, what: String },
    #[error("{pos}: undeclared variable `{name}`")]
    Undeclared { pos: Pos, name: String },
    #[error("{pos}: call to `{name}` passes {found} arguments, expected {expected}")]
    Arity { pos: Pos, name: String, expected: usize, found: usize },
    /// Arithmetic on a value with no scalar datatype (struct, void).
    #[error("{pos}: arithmetic on non-scalar value: {what}")]
    NonSdtArithmetic { pos: Pos, what: String },
    #[error("{pos}: assignment to const variable `{name}`")]
    AssignToConst { pos: Pos, name: String },
    /// Operand or initializer types that no conversion chain fixes.
    #[error("{pos}: type error: {msg}")]
    Type { pos: Pos, msg: String },
    /// Duplicate definitions, unknown type names, and similar.
    #[error("{pos}: definition error: {msg}")]
    Definition { pos: Pos, msg: String },
    #[error("{pos}: call stack exceeds depth {limit} inlining `{name}` (recursion?)")]
    CallDepth { pos: Pos, name: String, limit: usize },
}

impl From<lexer::LexError> for FrontendError {
    fn from(e: lexer::LexError) -> Self {
        FrontendError::Syntax { pos: e.pos, msg: e.msg }
    }
}
