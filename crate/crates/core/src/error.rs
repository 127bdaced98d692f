use thiserror::Error;

/// Errors raised by the algebra, norm and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("letter {letter} out of range 1..={n}")]
    LetterOutOfRange { letter: usize, n: usize },

    #[error("incompatible operands: {0}")]
    Incompatible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value overflows f64 (natural log {ln_value})")]
    Overflow { ln_value: f64 },

    #[error("degree {degree} exceeds cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },

    #[error("empty validity window")]
    EmptyWindow,

    #[error("rejected input: {0}")]
    Rejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;
