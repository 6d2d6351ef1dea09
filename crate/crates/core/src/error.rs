use thiserror::Error;

/// Errors raised by the bracket calculus.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("context error: {0}")]
    Context(String),
    #[error("parity error: {0}")]
    Parity(String),
    #[error("phase space error: {0}")]
    PhaseSpace(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("iteration error: {0}")]
    Iteration(String),
    #[error("state error: {0}")]
    State(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("limit error: {0}")]
    Limit(String),
    #[error("symbol error: {0}")]
    Symbol(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
