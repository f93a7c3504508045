use crate::kernels::{householder_qr, singular_values};
use crate::matrix::{Matrix, Scalar};

use super::SketchOperator;

/// Observed distortion of a sketch on a subspace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingReport {
    pub epsilon_observed: f64,
    /// Extreme singular values of `ΘW` with `W` an orthonormal basis of the subspace.
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub epsilon: f64,
    pub passed: bool,
}

/// Measures how well `theta` embeds `range(V)`: with `W = orth(V)`,
/// `epsilon_observed = max(1 − σ_min(ΘW)², σ_max(ΘW)² − 1)`.
pub fn verify_embedding<T: Scalar>(theta: &SketchOperator, v: &Matrix<T>, epsilon: f64) -> EmbeddingReport {
    let v = v.to_f64();
    let (w, _) = householder_qr(&v);
    let sw = theta.apply(&w).expect("sketch dimension must match V");
    let sv = singular_values(&sw).unwrap_or_else(|_| vec![f64::NAN]);
    let d = w.cols();
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    // A wide ΘW (k < d) has d − k zero singular values.
    let sigma_min = if sv.len() < d { 0.0 } else { sv.last().copied().unwrap_or(0.0) };
    let epsilon_observed = (1.0 - sigma_min * sigma_min)
        .max(sigma_max * sigma_max - 1.0)
        .max(0.0);
    EmbeddingReport {
        epsilon_observed,
        sigma_min,
        sigma_max,
        epsilon,
        passed: epsilon_observed <= epsilon,
    }
}
