//! Rank-revealing randomized Cholesky QR.

use log::warn;

use crate::error::{Error, Result};
use crate::kernels::{col_norms, norm2_matrix, tri_solve_right};
use crate::matrix::{Matrix, Permutation, Precision, Scalar};
use crate::mixed;
use crate::precision::PrecisionPolicy;
use crate::rcholqr::{check_sketch, ImplicitQ, QFactor};
use crate::sketch::SketchOperator;

/// Strong RRQR parameter.
pub const RRQR_F: f64 = 1.5;

/// Default truncation tolerance: `4e-15` in binary64, `2e-7` when the working
/// precision is binary32.
pub fn default_tau(policy: &PrecisionPolicy) -> f64 {
    match policy.working() {
        Precision::Binary64 => 4e-15,
        Precision::Binary32 => 2e-7,
    }
}

/// `XΠ ≈ Q R` with `Q` of `r` columns and `R` upper trapezoidal `r x n`.
#[derive(Clone, Debug)]
pub struct RRQRFactors<T: Scalar> {
    pub q: QFactor<T>,
    pub s: Matrix<f64>,
    pub r: Matrix<T>,
    pub perm: Permutation,
    pub rank: usize,
    pub tau: f64,
    /// Column norms of `X` in the original column order.
    pub norms: Vec<f64>,
    /// Original indices of zero columns; they sit at the end of `perm`.
    pub dropped: Vec<usize>,
}

impl<T: Scalar> RRQRFactors<T> {
    pub fn q(&self) -> Result<std::borrow::Cow<'_, Matrix<T>>> {
        match &self.q {
            QFactor::Explicit(q) => Ok(std::borrow::Cow::Borrowed(q)),
            QFactor::Implicit(h) => Ok(std::borrow::Cow::Owned(h.to_explicit()?)),
        }
    }

    /// `R` for the column-normalized matrix, `R D_π⁻¹` (zero columns stay zero).
    pub fn normalized_r(&self) -> Matrix<f64> {
        let mut r = self.r.to_f64();
        for (j, &c) in self.perm.as_slice().iter().enumerate() {
            let d = self.norms[c];
            if d > 0.0 {
                for v in r.col_mut(j) {
                    *v /= d;
                }
            }
        }
        r
    }
}

/// Smallest `r ≥ 1` with `‖R(r+1:, r+1:)‖_F ≤ τ‖R‖₂`; `‖R‖₂` from the SVD.
pub fn select_rank<T: Scalar>(r: &Matrix<T>, tau: f64) -> Result<usize> {
    let (p, n) = r.shape();
    let steps = p.min(n);
    if steps == 0 {
        return Ok(0);
    }
    let threshold = tau * norm2_matrix(r)?;
    // Trailing Frobenius norms by accumulating from the bottom-right corner.
    let r = r.to_f64();
    let mut tail = vec![0.0f64; steps + 1];
    let mut acc = 0.0;
    for s in (0..steps).rev() {
        for j in s..n {
            let v = r.get(s, j);
            acc += v * v;
        }
        for i in s + 1..p {
            let v = r.get(i, s);
            acc += v * v;
        }
        tail[s] = acc;
    }
    for rank in 1..steps {
        if tail[rank].sqrt() <= threshold {
            return Ok(rank);
        }
    }
    Ok(steps)
}

/// Rank-revealing randomized Cholesky QR.
///
/// `P = ΘX D⁻¹` with `D` the column norms, `PΠ = S R` by strong RRQR with
/// `f = 1.5`, rank `r` from [`select_rank`], and
/// `Q = (XΠ(:,1:r) D_π⁻¹) R₁₁⁻¹`. The returned `R` is the leading `r` rows,
/// un-normalized so that `XΠ ≈ Q R`.
///
/// Zero columns of `X` are dropped with a warning and placed last in `perm`;
/// an all-zero `X` is [`Error::ZeroColumn`].
pub fn rrrcholeskyqr<T: Scalar>(
    x: &Matrix<T>,
    theta: &SketchOperator,
    tau: f64,
    policy: &PrecisionPolicy,
) -> Result<RRQRFactors<T>> {
    policy.check_working::<T>()?;
    check_sketch(x, theta)?;
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidArgument(format!("tau must lie in (0, 1], got {tau}")));
    }
    let n = x.cols();
    let norms: Vec<f64> = col_norms(&x.to_f64());
    let (kept, dropped): (Vec<usize>, Vec<usize>) = (0..n).partition(|&j| norms[j] > 0.0);
    if kept.is_empty() {
        return Err(Error::ZeroColumn);
    }
    if !dropped.is_empty() {
        warn!("dropping {} zero column(s): {:?}", dropped.len(), dropped);
    }
    let xk = if dropped.is_empty() { x.clone() } else { x.select_columns(&kept) };
    let d: Vec<f64> = kept.iter().map(|&j| norms[j]).collect();

    let mut p = mixed::sketch(theta, &xk, policy)?;
    for (j, &dj) in d.iter().enumerate() {
        for v in p.col_mut(j) {
            *v /= dj;
        }
    }
    let fac = mixed::small_rrqr(&p, RRQR_F, policy)?;
    let rank = select_rank(&fac.r, tau)?.max(1);
    let piv = fac.perm.as_slice();

    let mut head = xk.select_columns(&piv[..rank]);
    for j in 0..rank {
        let inv = T::from_f64(1.0 / d[piv[j]]);
        for v in head.col_mut(j) {
            *v *= inv;
        }
    }
    let r11: Matrix<T> = fac.r.block(0..rank, 0..rank).cast();
    let q = tri_solve_right(&head, &r11)?;

    let nk = kept.len();
    let mut r = Matrix::<f64>::zeros(rank, n);
    for j in 0..nk {
        let dj = d[piv[j]];
        for i in 0..rank.min(j + 1) {
            r.set(i, j, fac.r.get(i, j) * dj);
        }
    }
    let map: Vec<usize> = piv.iter().map(|&j| kept[j]).chain(dropped.iter().copied()).collect();
    Ok(RRQRFactors {
        q: QFactor::Explicit(q),
        s: fac.s.columns(0..rank),
        r: r.cast(),
        perm: Permutation::new(map)?,
        rank,
        tau,
        norms,
        dropped,
    })
}

/// [`rrrcholeskyqr`] followed by one Cholesky QR pass on the `r` columns of `Q`.
pub fn rrrcholeskyqr2<T: Scalar>(
    x: &Matrix<T>,
    theta: &SketchOperator,
    tau: f64,
    policy: &PrecisionPolicy,
    implicit: bool,
) -> Result<RRQRFactors<T>> {
    let mut f = rrrcholeskyqr(x, theta, tau, policy)?;
    let QFactor::Explicit(q) = f.q else { unreachable!() };
    let r_prime = mixed::small_cholesky(&q.gram().to_f64(), policy)?;
    f.r = mixed::small_matmul(&r_prime, &f.r.to_f64(), policy).cast();
    f.s = tri_solve_right(&f.s, &r_prime)?;
    let r_prime_t: Matrix<T> = r_prime.cast();
    f.q = if implicit {
        QFactor::Implicit(ImplicitQ::new(q, r_prime_t)?)
    } else {
        QFactor::Explicit(tri_solve_right(&q, &r_prime_t)?)
    };
    Ok(f)
}
