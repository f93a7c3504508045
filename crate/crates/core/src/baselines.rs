//! Deterministic Cholesky QR comparators: CholeskyQR, CholeskyQR2 and shifted
//! CholeskyQR2/3.

use crate::error::{Error, Result};
use crate::kernels::{col_norms, norm2_matrix, tri_solve_right};
use crate::matrix::{Matrix, Scalar};
use crate::mixed;
use crate::precision::PrecisionPolicy;
use crate::rcholqr::QRFactors;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftBase {
    Zero,
    /// `s₀ = 11u(mn + n(n+1))‖X‖₂²`
    Recommended,
    /// `s₀ = u√n‖X‖_F²`
    Empirical,
}

impl ShiftBase {
    pub fn name(self) -> &'static str {
        match self {
            ShiftBase::Zero => "zero",
            ShiftBase::Recommended => "recommended",
            ShiftBase::Empirical => "empirical",
        }
    }
}

impl std::str::FromStr for ShiftBase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(ShiftBase::Zero),
            "recommended" => Ok(ShiftBase::Recommended),
            "empirical" => Ok(ShiftBase::Empirical),
            _ => Err(Error::InvalidArgument(format!(
                "unknown shift `{s}` (expected zero, recommended or empirical)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftPolicy {
    pub base: ShiftBase,
    /// Raise the shift by powers of ten until `XᵀX + sI` is numerically positive definite.
    pub escalation: bool,
}

/// Empirical base with escalation, the most stable variant on ill-conditioned inputs.
impl Default for ShiftPolicy {
    fn default() -> Self {
        Self {
            base: ShiftBase::Empirical,
            escalation: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    First,
    Second,
    Third,
}

/// Unshifted first-pass value `s₀` for a Gramian `a` of an `m`-row matrix.
pub fn base_shift(a: &Matrix<f64>, m: usize, base: ShiftBase, u: f64) -> Result<f64> {
    let n = a.cols() as f64;
    Ok(match base {
        ShiftBase::Zero => 0.0,
        // ‖X‖₂² = ‖XᵀX‖₂
        ShiftBase::Recommended => 11.0 * u * (m as f64 * n + n * (n + 1.0)) * norm2_matrix(a)?,
        ShiftBase::Empirical => u * n.sqrt() * a.diag().iter().sum::<f64>(),
    })
}

fn shifted(a: &Matrix<f64>, s: f64) -> Matrix<f64> {
    let mut b = a.clone();
    for i in 0..b.rows() {
        b.set(i, i, b.get(i, i) + s);
    }
    b
}

/// Shift escalation: tries `s₀`, then `10^e` for `e = ⌊log₁₀ s₀⌋ + 1, …, 0`
/// (starting from `10⁻¹⁶` when `s₀ = 0`), returning the first shift for which
/// Cholesky succeeds together with the factor.
fn factor_with_shift(
    a: &Matrix<f64>,
    s0: f64,
    escalation: bool,
    policy: &PrecisionPolicy,
) -> Result<(f64, Matrix<f64>)> {
    match mixed::small_cholesky(&shifted(a, s0), policy) {
        Ok(r) => return Ok((s0, r)),
        Err(Error::NotPositiveDefinite { .. }) if escalation => {}
        Err(e) => return Err(e),
    }
    let start = if s0 > 0.0 { s0.log10().floor() as i32 + 1 } else { -16 };
    for e in start..=0 {
        let s = 10f64.powi(e);
        if s <= s0 {
            continue;
        }
        match mixed::small_cholesky(&shifted(a, s), policy) {
            Ok(r) => return Ok((s, r)),
            Err(Error::NotPositiveDefinite { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::ShiftEscalationExhausted)
}

/// Shift used at a given stage of shifted CholeskyQR. The first stage uses the
/// policy's `s₀` (escalated if needed); the second tries zero, then escalates;
/// the third is always zero.
pub fn compute_shift<T: Scalar>(
    x: &Matrix<T>,
    stage: Stage,
    shift: &ShiftPolicy,
    policy: &PrecisionPolicy,
) -> Result<f64> {
    let a = x.gram().to_f64();
    Ok(stage_factor(&a, x.rows(), stage, shift, policy)?.0)
}

fn stage_factor(
    a: &Matrix<f64>,
    m: usize,
    stage: Stage,
    shift: &ShiftPolicy,
    policy: &PrecisionPolicy,
) -> Result<(f64, Matrix<f64>)> {
    match stage {
        Stage::First => {
            let s0 = base_shift(a, m, shift.base, policy.u())?;
            factor_with_shift(a, s0, shift.escalation, policy)
        }
        Stage::Second => factor_with_shift(a, 0.0, shift.escalation, policy),
        Stage::Third => Ok((0.0, mixed::small_cholesky(a, policy)?)),
    }
}

/// One Cholesky QR pass with an optional Gramian shift.
fn pass<T: Scalar>(
    x: &Matrix<T>,
    stage: Option<Stage>,
    shift: &ShiftPolicy,
    policy: &PrecisionPolicy,
) -> Result<(Matrix<T>, Matrix<f64>)> {
    let a = x.gram().to_f64();
    let r = match stage {
        None => mixed::small_cholesky(&a, policy)?,
        Some(stage) => stage_factor(&a, x.rows(), stage, shift, policy)?.1,
    };
    let q = tri_solve_right(x, &r.cast::<T>())?;
    Ok((q, r))
}

/// `A = XᵀX`, `R = chol(A)`, `Q = XR⁻¹`.
pub fn choleskyqr<T: Scalar>(x: &Matrix<T>, policy: &PrecisionPolicy) -> Result<QRFactors<T>> {
    policy.check_working::<T>()?;
    let (q, r) = pass(x, None, &ShiftPolicy::default(), policy)?;
    Ok(QRFactors::explicit(q, None, r.cast()))
}

/// Two Cholesky QR passes with `R = R₂R₁`.
pub fn choleskyqr2<T: Scalar>(x: &Matrix<T>, policy: &PrecisionPolicy) -> Result<QRFactors<T>> {
    policy.check_working::<T>()?;
    let sp = ShiftPolicy::default();
    let (q1, r1) = pass(x, None, &sp, policy)?;
    let (q2, r2) = pass(&q1, None, &sp, policy)?;
    let r = mixed::small_matmul(&r2, &r1, policy);
    Ok(QRFactors::explicit(q2, None, r.cast()))
}

fn shifted_choleskyqr<T: Scalar>(
    x: &Matrix<T>,
    shift: &ShiftPolicy,
    policy: &PrecisionPolicy,
    stages: &[Stage],
) -> Result<QRFactors<T>> {
    policy.check_working::<T>()?;
    let d: Vec<T> = col_norms(x)
        .into_iter()
        .map(|v| if v == T::ZERO { T::ONE } else { v })
        .collect();
    let mut q = x.clone();
    for (j, &dj) in d.iter().enumerate() {
        for v in q.col_mut(j) {
            *v /= dj;
        }
    }
    let mut r = Matrix::<f64>::identity(x.cols());
    for &stage in stages {
        let (qn, rs) = pass(&q, Some(stage), shift, policy)?;
        q = qn;
        r = mixed::small_matmul(&rs, &r, policy);
    }
    for (j, &dj) in d.iter().enumerate() {
        let dj = dj.to_f64();
        for v in r.col_mut(j) {
            *v *= dj;
        }
    }
    Ok(QRFactors::explicit(q, None, r.cast()))
}

/// Shifted CholeskyQR2 on column-normalized `X`.
pub fn shifted_choleskyqr2<T: Scalar>(x: &Matrix<T>, shift: &ShiftPolicy, policy: &PrecisionPolicy) -> Result<QRFactors<T>> {
    shifted_choleskyqr(x, shift, policy, &[Stage::First, Stage::Second])
}

/// Shifted CholeskyQR3 on column-normalized `X`.
pub fn shifted_choleskyqr3<T: Scalar>(x: &Matrix<T>, shift: &ShiftPolicy, policy: &PrecisionPolicy) -> Result<QRFactors<T>> {
    shifted_choleskyqr(x, shift, policy, &[Stage::First, Stage::Second, Stage::Third])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{gen_svd_matrix, random_orthonormal};
    use crate::kernels::{cond, singular_values};

    fn delta(q: &Matrix<f64>) -> f64 {
        singular_values(&q.gram().sub(&Matrix::identity(q.cols()))).unwrap()[0]
    }

    #[test]
    fn orthogonal_columns() {
        let x = Matrix::<f64>::from_rows(&[&[3.0, 0.0], &[0.0, 4.0], &[0.0, 0.0]]);
        let f = choleskyqr(&x, &PrecisionPolicy::F64).unwrap();
        assert_eq!(*f.q().unwrap(), Matrix::eye(3, 2));
        assert_eq!(f.r, Matrix::from_diag(&[3.0, 4.0]));
    }

    #[test]
    fn orthonormal_input_gives_identity_r() {
        let x = random_orthonormal(100, 6, 2);
        for f in [
            choleskyqr(&x, &PrecisionPolicy::F64).unwrap(),
            choleskyqr2(&x, &PrecisionPolicy::F64).unwrap(),
            shifted_choleskyqr2(&x, &ShiftPolicy::default(), &PrecisionPolicy::F64).unwrap(),
            shifted_choleskyqr3(&x, &ShiftPolicy::default(), &PrecisionPolicy::F64).unwrap(),
        ] {
            assert!(f.r.sub(&Matrix::identity(6)).max_abs() < 1e-10);
            assert!(f.q().unwrap().sub(&x).max_abs() < 1e-10);
        }
    }

    #[test]
    fn cholqr_fails_past_inverse_sqrt_u() {
        let x = gen_svd_matrix(1000, 20, 1e-10, 1);
        match choleskyqr(&x, &PrecisionPolicy::F64) {
            Err(Error::NotPositiveDefinite { .. }) => {}
            Ok(f) => assert!(delta(&f.q().unwrap()) > 1e-2),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn cholqr2_well_conditioned() {
        let x = gen_svd_matrix(1000, 20, 1e-3, 2);
        let f = choleskyqr2(&x, &PrecisionPolicy::F64).unwrap();
        assert!(delta(&f.q().unwrap()) <= 1e-14);
        assert!(f.r.is_upper_triangular() && f.r.diag().iter().all(|&d| d > 0.0));
    }

    #[test]
    fn cholqr2_fails_at_1e12() {
        let x = gen_svd_matrix(1000, 20, 1e-12, 3);
        match choleskyqr2(&x, &PrecisionPolicy::F64) {
            Err(Error::NotPositiveDefinite { .. }) => {}
            Ok(f) => assert!(delta(&f.q().unwrap()) > 1e-4),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn recommended_shift_formula() {
        // m=100, n=10, ‖X‖₂ = 1.
        let x = Matrix::<f64>::eye(100, 10);
        let s0 = base_shift(&x.gram(), 100, ShiftBase::Recommended, 2f64.powi(-53)).unwrap();
        let oracle = 11.0 * 2f64.powi(-53) * 1110.0;
        assert!((s0 - oracle).abs() <= 1e-15 * oracle);
        assert!((s0 - 1.3555823e-12).abs() < 1e-18);
        let sp = ShiftPolicy {
            base: ShiftBase::Recommended,
            escalation: true,
        };
        let s = compute_shift(&x, Stage::First, &sp, &PrecisionPolicy::F64).unwrap();
        assert_eq!(s, s0);
        assert_eq!(compute_shift(&x, Stage::Second, &sp, &PrecisionPolicy::F64).unwrap(), 0.0);
        assert_eq!(compute_shift(&x, Stage::Third, &sp, &PrecisionPolicy::F64).unwrap(), 0.0);
    }

    #[test]
    fn empirical_shift_formula() {
        let x = Matrix::<f64>::eye(50, 4).scale(2.0);
        let s0 = base_shift(&x.gram(), 50, ShiftBase::Empirical, 2f64.powi(-53)).unwrap();
        assert_eq!(s0, 2f64.powi(-53) * 2.0 * 16.0);
    }

    #[test]
    fn rank_deficient_escalates() {
        let x = Matrix::<f64>::from_rows(&[&[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]]);
        let sp = ShiftPolicy {
            base: ShiftBase::Zero,
            escalation: true,
        };
        let s = compute_shift(&x, Stage::First, &sp, &PrecisionPolicy::F64).unwrap();
        // Oracle: first power of ten passing Cholesky, tried in order.
        let a = x.gram();
        let expect = (-16..=0)
            .map(|e| 10f64.powi(e))
            .find(|&s| crate::kernels::cholesky(&shifted(&a, s)).is_ok())
            .unwrap();
        assert_eq!(s, expect);
        let none = ShiftPolicy {
            base: ShiftBase::Zero,
            escalation: false,
        };
        assert!(compute_shift(&x, Stage::First, &none, &PrecisionPolicy::F64).is_err());
    }

    #[test]
    fn escalation_exhausts() {
        let mut a = Matrix::<f64>::identity(2);
        a.set(1, 1, -5.0);
        assert!(matches!(
            factor_with_shift(&a, 0.0, true, &PrecisionPolicy::F64),
            Err(Error::ShiftEscalationExhausted)
        ));
    }

    #[test]
    fn shifted_variants_on_cond_1e14() {
        let x = gen_svd_matrix(2000, 20, 1e-14, 4);
        let sp = ShiftPolicy::default();
        let f2 = shifted_choleskyqr2(&x, &sp, &PrecisionPolicy::F64).unwrap();
        assert!(cond(&*f2.q().unwrap()).unwrap() <= 100.0);
        let f3 = shifted_choleskyqr3(&x, &sp, &PrecisionPolicy::F64).unwrap();
        assert!(delta(&f3.q().unwrap()) <= 1e-13);
        assert!(f3.r.is_upper_triangular() && f3.r.diag().iter().all(|&d| d > 0.0));
        let res = f3.q().unwrap().matmul(&f3.r).sub(&x);
        for j in 0..20 {
            let rel = crate::matrix::norm2(res.col(j)) / crate::matrix::norm2(x.col(j));
            assert!(rel < 1e-13, "{rel}");
        }
    }

    #[test]
    fn every_base_handles_cond_1e14_at_small_m() {
        let x = gen_svd_matrix(500, 10, 1e-14, 6);
        for base in [ShiftBase::Zero, ShiftBase::Recommended, ShiftBase::Empirical] {
            let sp = ShiftPolicy { base, escalation: true };
            let f3 = shifted_choleskyqr3(&x, &sp, &PrecisionPolicy::F64).unwrap();
            assert!(delta(&f3.q().unwrap()) <= 1e-13, "{base:?}");
        }
    }
}
