//! Manifests, expression parsing, command dispatch and reports.

mod cli;
pub mod expr;
mod manifest;
mod report;

use thiserror::Error;

pub use cli::{main_with, run, Cli, Command, Outcome, Status};
pub use expr::{parse_form, parse_multivector, parse_poly, parse_value, Value};
pub use manifest::{Entry, Manifest, MANIFEST_VERSION};
pub use report::{trajectory_csv, Report, REPORT_VERSION};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("line {line}, column {col}: unexpected character `{found}`")]
    Lex { line: usize, col: usize, found: char },
    #[error("line {line}, column {col}: found {found}, expected one of: {}", expected.join(", "))]
    Parse { line: usize, col: usize, found: String, expected: Vec<String> },
    #[error("line {line}, column {col}: unresolved name `{name}`")]
    Unresolved { line: usize, col: usize, name: String },
    #[error("line {line}, column {col}: {msg}")]
    Type { line: usize, col: usize, msg: String },
    #[error("line {line}: `{name}` is declared closed but d{name} does not vanish")]
    NotClosed { line: usize, name: String },
    #[error("line {line}: redefinition of `{name}`")]
    Duplicate { line: usize, name: String },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported manifest version {found}")]
    Version { found: u32 },
    #[error("{0}")]
    Input(String),
}
