use std::fmt;

use crate::kernels::{cond, singular_values};
use crate::matrix::{norm2, Matrix, Permutation, Scalar};
use crate::sketch::SketchOperator;

/// A factorization `XΠ ≈ Q R` in binary64, as produced by any method.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub q: Matrix<f64>,
    pub r: Matrix<f64>,
    pub s: Option<Matrix<f64>>,
    pub perm: Option<Permutation>,
    pub rank: Option<usize>,
}

impl Factorization {
    pub fn new<T: Scalar>(q: &Matrix<T>, r: &Matrix<T>) -> Self {
        Self {
            q: q.to_f64(),
            r: r.to_f64(),
            s: None,
            perm: None,
            rank: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub cond_q: f64,
    /// `‖QᵀQ − I‖₂`
    pub delta_orth: f64,
    /// `max_j ‖(XΠ − QR)(:, j)‖ / ‖XΠ(:, j)‖` over nonzero columns.
    pub max_col_residual: f64,
    /// `‖S − ΘQ‖_F`, when the method produced a sketch.
    pub sketch_gap: Option<f64>,
    pub rank_detected: Option<usize>,
    pub method: String,
    pub seed: Option<u64>,
    pub precision: String,
}

impl StabilityReport {
    pub fn is_finite(&self) -> bool {
        self.cond_q.is_finite()
            && self.delta_orth.is_finite()
            && self.max_col_residual.is_finite()
            && self.sketch_gap.map_or(true, f64::is_finite)
    }
}

impl fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method = {}", self.method)?;
        writeln!(f, "precision = {}", self.precision)?;
        if let Some(s) = self.seed {
            writeln!(f, "seed = {s}")?;
        }
        writeln!(f, "cond_q = {:e}", self.cond_q)?;
        writeln!(f, "delta_orth = {:e}", self.delta_orth)?;
        writeln!(f, "max_col_residual = {:e}", self.max_col_residual)?;
        if let Some(g) = self.sketch_gap {
            writeln!(f, "sketch_gap = {g:e}")?;
        }
        if let Some(r) = self.rank_detected {
            writeln!(f, "rank_detected = {r}")?;
        }
        Ok(())
    }
}

/// `‖QᵀQ − I‖₂` in binary64.
pub fn orthogonality_loss(q: &Matrix<f64>) -> f64 {
    let g = q.gram().sub(&Matrix::identity(q.cols()));
    singular_values(&g).map(|s| s.first().copied().unwrap_or(0.0)).unwrap_or(f64::NAN)
}

/// Largest relative column residual of `XΠ ≈ Q R`, skipping zero columns.
pub fn max_col_residual(x: &Matrix<f64>, f: &Factorization) -> f64 {
    let xp = match &f.perm {
        Some(p) => p.apply_columns(x),
        None => x.clone(),
    };
    let d = f.q.matmul(&f.r).sub(&xp);
    (0..xp.cols())
        .filter_map(|j| {
            let nx = norm2(xp.col(j));
            (nx > 0.0).then(|| norm2(d.col(j)) / nx)
        })
        .fold(0.0, f64::max)
}

/// All metrics in binary64 regardless of the precision the factors were computed in.
pub fn stability_report(
    x: &Matrix<f64>,
    f: &Factorization,
    theta: Option<&SketchOperator>,
    method: &str,
    seed: Option<u64>,
    precision: &str,
) -> StabilityReport {
    let sketch_gap = match (&f.s, theta) {
        (Some(s), Some(t)) => t.apply(&f.q).ok().map(|tq| s.sub(&tq).frobenius_norm()),
        _ => None,
    };
    StabilityReport {
        cond_q: cond(&f.q).unwrap_or(f64::NAN),
        delta_orth: orthogonality_loss(&f.q),
        max_col_residual: max_col_residual(x, f),
        sketch_gap,
        rank_detected: f.rank,
        method: method.to_string(),
        seed,
        precision: precision.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::random_orthonormal;

    #[test]
    fn orthonormal_q() {
        let q = random_orthonormal(200, 7, 1);
        let f = Factorization::new(&q, &Matrix::identity(7));
        let r = stability_report(&q, &f, None, "x", None, "f64");
        assert!(r.delta_orth <= 1e-13);
        assert!((r.cond_q - 1.0).abs() <= 1e-12);
        assert!(r.max_col_residual <= 1e-15);
        assert!(r.is_finite());
    }

    #[test]
    fn scaled_orthonormal_q() {
        let q = random_orthonormal(100, 4, 2).scale(2.0);
        let f = Factorization::new(&q, &Matrix::identity(4));
        let r = stability_report(&q, &f, None, "x", None, "f64");
        assert!((r.cond_q - 1.0).abs() < 1e-12);
        assert!((r.delta_orth - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rcholqr_on_cond_1e10() {
        let x = crate::harness::gen_svd_matrix(2000, 20, 1e-10, 3);
        let theta = SketchOperator::gaussian(60, 2000, 7);
        let fac = crate::rcholqr::rcholeskyqr(&x, &theta, &crate::PrecisionPolicy::F64).unwrap();
        let mut f = Factorization::new(&*fac.q().unwrap(), &fac.r);
        f.s = fac.s.clone();
        let r = stability_report(&x, &f, Some(&theta), "rcholqr", Some(7), "f64");
        assert!(r.max_col_residual <= 1e-13, "{}", r.max_col_residual);
        let bound = 100.0 * f64::EPSILON / 2.0 * 20f64.powf(1.5) * 1e10;
        assert!(r.sketch_gap.unwrap() <= bound, "{:?}", r.sketch_gap);
    }
}
