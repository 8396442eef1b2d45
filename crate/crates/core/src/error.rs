use crate::matcore::Vec2;

/// Errors produced by the matrix, polygon and iteration routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("product enumeration needs {words} words, budget is {budget}")]
    ResourceLimit { words: f64, budget: u64 },

    #[error("degenerate body: points do not span the plane")]
    DegenerateBody,

    #[error("matrix set is reducible: common invariant line along ({:.6}, {:.6})", witness.x, witness.y)]
    Reducible { witness: Vec2 },

    #[error("seed is not extremal at step {step}: inclusion ratio {ratio:.12} exceeds 1")]
    NotExtremal { step: usize, ratio: f64 },

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
