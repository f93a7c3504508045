//! Kernels executed in the minor precision of a policy. Results are stored in
//! binary64, which represents binary32 values exactly.

use crate::error::Result;
use crate::kernels::{cholesky, householder_qr, strong_rrqr, RrqrFactors};
use crate::matrix::{Matrix, Scalar};
use crate::precision::{Op, PrecisionPolicy};
use crate::sketch::SketchOperator;
use crate::with_precision;

pub(crate) fn sketch<T: Scalar>(theta: &SketchOperator, x: &Matrix<T>, policy: &PrecisionPolicy) -> Result<Matrix<f64>> {
    with_precision!(policy.precision_for(Op::ApplySketch), U => {
        if U::PRECISION == T::PRECISION {
            Ok(theta.apply(x)?.to_f64())
        } else {
            Ok(theta.apply(&x.cast::<U>())?.to_f64())
        }
    })
}

pub(crate) fn small_qr(p: &Matrix<f64>, policy: &PrecisionPolicy) -> (Matrix<f64>, Matrix<f64>) {
    with_precision!(policy.precision_for(Op::SmallQr), U => {
        let (s, r) = householder_qr(&p.cast::<U>());
        (s.to_f64(), r.to_f64())
    })
}

pub(crate) fn small_rrqr(p: &Matrix<f64>, f: f64, policy: &PrecisionPolicy) -> Result<RrqrFactors<f64>> {
    with_precision!(policy.precision_for(Op::RrqrSmall), U => {
        let fac = strong_rrqr(&p.cast::<U>(), f)?;
        Ok(RrqrFactors {
            s: fac.s.to_f64(),
            r: fac.r.to_f64(),
            perm: fac.perm,
            swaps: fac.swaps,
        })
    })
}

pub(crate) fn small_cholesky(a: &Matrix<f64>, policy: &PrecisionPolicy) -> Result<Matrix<f64>> {
    with_precision!(policy.precision_for(Op::SmallCholesky), U => {
        Ok(cholesky(&a.cast::<U>())?.to_f64())
    })
}

/// Product of small matrices in the minor precision.
pub(crate) fn small_matmul(a: &Matrix<f64>, b: &Matrix<f64>, policy: &PrecisionPolicy) -> Matrix<f64> {
    with_precision!(policy.minor(), U => a.cast::<U>().matmul(&b.cast::<U>()).to_f64())
}

/// `AᵀB` for small matrices in the minor precision.
pub(crate) fn small_tr_matmul(a: &Matrix<f64>, b: &Matrix<f64>, policy: &PrecisionPolicy) -> Matrix<f64> {
    with_precision!(policy.minor(), U => a.cast::<U>().tr_matmul(&b.cast::<U>()).to_f64())
}

/// `A − B` in the minor precision.
pub(crate) fn small_sub(a: &Matrix<f64>, b: &Matrix<f64>, policy: &PrecisionPolicy) -> Matrix<f64> {
    with_precision!(policy.minor(), U => a.cast::<U>().sub(&b.cast::<U>()).to_f64())
}
