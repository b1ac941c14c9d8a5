//! Error type shared by every module in the crate.

use thiserror::Error;

/// Everything that can go wrong inside the library.
///
/// Construction errors (`EmptyVector`, `NonFinite`, `InvalidSubspaceDim`)
/// are raised by type constructors; the remaining variants come from
/// individual operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("a vector must have at least one coordinate")]
    EmptyVector,

    #[error("non-finite coordinate at position {0}")]
    NonFinite(usize),

    #[error("m must satisfy 1 <= m <= p (got m={m}, p={p})")]
    InvalidSubspaceDim { m: usize, p: usize },

    /// `column` is the 1-based position of the offending input column.
    #[error("column {column} is numerically dependent on the columns before it")]
    RankDeficient { column: usize },

    #[error("orthonormalization lost orthogonality: |<u{i}, u{j}> - d_ij| = {deviation:e}")]
    NotOrthonormal { i: usize, j: usize, deviation: f64 },

    #[error("the zero vector has no direction")]
    ZeroVector,

    #[error("rotation block rejected: {0}")]
    BadBlock(String),

    #[error("operator axis does not match the supplied vector")]
    AxisMismatch,

    #[error("too few usable samples: needed {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
