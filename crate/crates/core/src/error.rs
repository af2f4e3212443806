use std::io;

use thiserror::Error;

/// A syntax or directive error, located by 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("existence error: unknown procedure {0}")]
    UnknownProcedure(String),
    #[error("instantiation error: {0}")]
    Instantiation(&'static str),
    #[error("type error: expected {expected}, found {found}")]
    Type { expected: &'static str, found: String },
    #[error("type error: {0} is not an evaluable arithmetic expression")]
    NotEvaluable(String),
    #[error("evaluation error: {0}")]
    Evaluation(&'static str),
    #[error("shift/1 called outside any reset/3")]
    ShiftWithoutReset,
    #[error("resource error: step limit of {0} resolution steps exceeded")]
    StepLimit(u64),
    #[error("output error: {0}")]
    Output(#[from] io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Any failure of the public convenience entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;
