use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("zero argument rejected: {0}")]
    ZeroArgument(&'static str),
    #[error("working level {have} too small, need at least {need}")]
    InsufficientLevel { need: u32, have: u32 },
    #[error("level {0} exceeds the 62-bit coordinate precision of this field")]
    PrecisionExceeded(u32),
    #[error("enumeration of {points} points exceeds budget {budget}; use the histogram kernel")]
    BudgetExceeded { points: u128, budget: u128 },
    #[error("form is isotropic; stabilized extension needs an anisotropic form")]
    Isotropic,
    #[error("unrealizable request: {0}")]
    Unrealizable(String),
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("geometric ratio {0} does not contract")]
    NonContracting(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
