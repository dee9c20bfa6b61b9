use thiserror::Error;

use crate::index::MultiIndex;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MopucError {
    #[error("index {0} is not normal")]
    NotNormal(MultiIndex),

    #[error("the zero multi-index has no type I normalization")]
    ZeroIndex,

    #[error("measure index {index} out of range for a system of {r} measures")]
    MeasureOutOfRange { index: usize, r: usize },

    #[error("multi-index {index} has {got} entries, expected {expected}")]
    DimensionMismatch {
        index: MultiIndex,
        got: usize,
        expected: usize,
    },

    #[error("empty system")]
    EmptySystem,

    #[error("measure {}: {reason}", .measure + 1)]
    InvalidMeasure { measure: usize, reason: String },

    #[error("schema: {0}")]
    Schema(String),

    #[error("invalid scalar literal {literal:?}: {reason}")]
    Literal { literal: String, reason: String },

    #[error("invalid tolerance policy: {0}")]
    Policy(String),

    #[error("directions must differ (k = l = {0})")]
    SameDirection(usize),

    #[error("entry {k} of {index} is zero; cannot step down")]
    EmptyDirection { index: MultiIndex, k: usize },

    #[error("invalid lattice path: {0}")]
    InvalidPath(String),

    #[error("singular Toeplitz minor of size {0}")]
    SingularMinor(usize),

    #[error("singular matrix")]
    Singular,
}

pub type Result<T, E = MopucError> = std::result::Result<T, E>;
