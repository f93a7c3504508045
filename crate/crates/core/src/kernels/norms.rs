use crate::error::Result;
use crate::matrix::{norm2, Matrix, Scalar};

use super::svd::singular_values;

/// ℓ₂ norm of each column.
pub fn col_norms<T: Scalar>(x: &Matrix<T>) -> Vec<T> {
    (0..x.cols()).map(|j| norm2(x.col(j))).collect()
}

/// `σ_max / σ_min` in binary64; `+∞` when `σ_min = 0`.
pub fn cond<T: Scalar>(a: &Matrix<T>) -> Result<f64> {
    let s = singular_values(a)?;
    let (Some(&hi), Some(&lo)) = (s.first(), s.last()) else {
        return Ok(f64::NAN);
    };
    Ok(if lo == 0.0 { f64::INFINITY } else { hi / lo })
}

/// Spectral norm in binary64.
pub fn norm2_matrix<T: Scalar>(a: &Matrix<T>) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}
