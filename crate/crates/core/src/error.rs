use thiserror::Error;

use crate::arith::{format_rat, format_vec, QVec, Rat};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("generators span only a {rank}-dimensional subspace of Q^{dim}; not a unit ball")]
    DegenerateBall { dim: usize, rank: usize },

    #[error("functionals do not separate points: {} is annihilated by all of them", format_vec(.witness))]
    Seminorm { witness: QVec },

    #[error("basis vectors are linearly dependent")]
    DependentBasis,

    #[error("linear map is not invertible")]
    SingularMap,

    #[error("point is not on the unit sphere (norm {})", format_rat(.norm))]
    NotOnSphere { norm: Rat },

    #[error("map is not a surjective linear isometry of the space")]
    NotAnIsometry,

    #[error("unit ball has {found} vertex pairs, above the cap of {cap}")]
    TooManyVertices { found: usize, cap: usize },

    #[error("embedding precondition fails: {reason} at {}", format_vec(.witness))]
    Embedding { reason: String, witness: QVec },

    #[error("support index {index} lies outside the window [{lo}, {hi}]")]
    OutsideWindow { index: i64, lo: i64, hi: i64 },

    #[error("invalid partial isometry: {0}")]
    InvalidPartialIsometry(String),

    #[error("parse error: {0}")]
    Parse(String),
}
