//! Joint spectral radius of finite sets of real 2×2 matrices, together with
//! polygonal Barabanov norms and Dranishnikov–Konyagin invariant bodies.
//!
//! Products are composed right to left: the word `(σ₁, …, σₙ)` denotes
//! `A_{σₙ} ⋯ A_{σ₁}`. Matrix indices are 0-based.

pub mod dkbody;
pub mod error;
pub mod matcore;
pub mod polygeom;
pub mod relaxation;

pub use error::{Error, Result};
pub use matcore::{Mat2, MatrixSet, Vec2};
pub use polygeom::{HalfplanePair, LinearImage, SymPolygon};
