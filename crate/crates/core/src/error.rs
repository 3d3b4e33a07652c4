use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precision of {digits} digits is below the supported minimum of {min}")]
    PrecisionTooLow { digits: u32, min: u32 },

    #[error("sign tolerance exponent {tol} must be positive and below the digit count {digits}")]
    BadTolerance { digits: u32, tol: u32 },

    #[error("mixed precision contexts: {left} digits vs {right} digits")]
    MixedPrecision { left: u32, right: u32 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid index selection: {0}")]
    Index(String),

    #[error("values are not strictly decreasing at position {0}")]
    NotDescending(usize),

    #[error("point (lambda = {lambda}, x = {x}) lies outside the domain of {family}")]
    Domain {
        family: String,
        lambda: String,
        x: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
