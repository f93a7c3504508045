//! Randomized Cholesky QR factorizations of tall-and-skinny matrices.
//!
//! The crate provides the sketch-based RCholeskyQR family (including the
//! rank-revealing variant), deterministic Cholesky QR baselines, the dense
//! kernels they are built from, and a small numerical harness.

mod error;
pub mod baselines;
pub mod harness;
pub mod kernels;
pub mod matrix;
pub mod precision;
pub mod rcholqr;
pub mod reduced;
pub mod rrrcholqr;
mod mixed;
pub mod sketch;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, Matrix, Permutation, Precision, Scalar};
pub use precision::{Op, OpClass, PrecisionPolicy};
pub use sketch::{SketchKind, SketchOperator};
