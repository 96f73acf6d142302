//! Java subset frontend: lexer, parser, syntax tree and doc-comment tags.

mod ast;
mod doc;
mod lexer;
mod parser;
pub mod visit;

use thiserror::Error;

pub use ast::*;
pub use doc::{extract_doc_throws, DocThrows};
pub use parser::parse_compilation_unit;

/// A syntax error; displays as `file:line:col: message`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{position}: {message}")]
pub struct ParseError {
    pub position: SourcePosition,
    pub message: String,
}

impl ParseError {
    pub fn new(file: &str, line: u32, column: u32, message: impl Into<String>) -> Self {
        ParseError {
            position: SourcePosition::new(file, line, column),
            message: message.into(),
        }
    }
}
