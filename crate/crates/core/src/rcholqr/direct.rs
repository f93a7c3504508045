use crate::error::{Error, Result};
use crate::kernels::tri_solve_right;
use crate::matrix::{Matrix, Scalar};
use crate::mixed;
use crate::precision::PrecisionPolicy;
use crate::sketch::SketchOperator;

use super::factors::{ImplicitQ, QFactor, QRFactors};

pub(crate) fn check_sketch<T: Scalar>(x: &Matrix<T>, theta: &SketchOperator) -> Result<()> {
    if theta.m() != x.rows() {
        return Err(Error::DimensionMismatch(format!(
            "sketch maps from dimension {}, X has {} rows",
            theta.m(),
            x.rows()
        )));
    }
    Ok(())
}

/// Randomized Cholesky QR: `P = ΘX`, `P = S R` by Householder QR, `Q = X R⁻¹`.
///
/// The sketch and the small QR run in the policy's minor precision; the
/// forward substitution runs in the working precision `T`. A numerically
/// singular `R` surfaces as [`Error::SingularTriangular`].
pub fn rcholeskyqr<T: Scalar>(x: &Matrix<T>, theta: &SketchOperator, policy: &PrecisionPolicy) -> Result<QRFactors<T>> {
    policy.check_working::<T>()?;
    check_sketch(x, theta)?;
    let n = x.cols();
    if theta.k() < n {
        return Err(Error::DimensionMismatch(format!(
            "sketch dimension {} is smaller than the number of columns {n}",
            theta.k()
        )));
    }
    let p = mixed::sketch(theta, x, policy)?;
    let (s, r) = mixed::small_qr(&p, policy);
    let r_t: Matrix<T> = r.cast();
    if let Some(i) = r_t.diag().iter().position(|&d| d == T::ZERO) {
        return Err(Error::SingularTriangular { index: i });
    }
    let q = tri_solve_right(x, &r_t)?;
    Ok(QRFactors::explicit(q, Some(s), r_t))
}

/// RCholeskyQR followed by one Cholesky QR pass: `A = QᵀQ`, `R′ = chol(A)`,
/// `R ← R′R`, and `Q ← QR′⁻¹` (or the pair `(Q, R′)` when `implicit`).
pub fn rcholeskyqr2<T: Scalar>(
    x: &Matrix<T>,
    theta: &SketchOperator,
    policy: &PrecisionPolicy,
    implicit: bool,
) -> Result<QRFactors<T>> {
    let first = rcholeskyqr(x, theta, policy)?;
    let QFactor::Explicit(q) = first.q else { unreachable!() };
    let a = q.gram().to_f64();
    let r_prime = mixed::small_cholesky(&a, policy)?;
    let r = mixed::small_matmul(&r_prime, &first.r.to_f64(), policy);
    let s = first
        .s
        .map(|s| crate::kernels::tri_solve_right(&s, &r_prime))
        .transpose()?;
    let r_prime_t: Matrix<T> = r_prime.cast();
    let q = if implicit {
        QFactor::Implicit(ImplicitQ::new(q, r_prime_t)?)
    } else {
        QFactor::Explicit(tri_solve_right(&q, &r_prime_t)?)
    };
    Ok(QRFactors { q, s, r: r.cast() })
}
