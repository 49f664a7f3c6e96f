use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("breakpoints must be strictly increasing (violated at index {0})")]
    NonIncreasingBreakpoints(usize),
    #[error("negative value {value} on piece {index}")]
    NegativeValue { index: usize, value: String },
    #[error("expected {expected} values for the given breakpoints, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("empty interval: need a < b, got [{a}, {b}]")]
    EmptyInterval { a: String, b: String },
    #[error("exponent p must exceed 1, got {0}")]
    InvalidExponent(f64),
    #[error("level must be nonnegative, got {0}")]
    NegativeLevel(String),
    #[error("argument t must be >= {min}, got {t}")]
    DomainT { t: f64, min: f64 },
    #[error("invalid order n = {0}")]
    InvalidOrder(usize),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("grid is empty or has fewer than two nodes")]
    EmptyGrid,
    #[error("grid does not cover the support of the function")]
    GridNotCovering,
    #[error("grid does not contain breakpoint {0}")]
    GridNotRefining(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
