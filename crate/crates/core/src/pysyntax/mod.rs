//! A Python front end: tokenizer and recursive-descent parser.
//!
//! Covers the statement and expression grammar of Python 3 up to structural
//! pattern matching, which is not supported. Anything the grammar rejects is
//! reported as a [`SyntaxError`] with the position of the offending token.

pub mod ast;
pub mod lexer;
pub mod parser;

use alloc::string::String;

pub use parser::parse_module;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}
