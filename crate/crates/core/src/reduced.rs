//! Reduced RCholeskyQR: `Z = L Q` for a small extractor `L` without forming
//! `Q`, and sketched Galerkin / minimal-residual reduced systems.

use crate::error::{Error, Result};
use crate::kernels::{least_squares, tri_solve_right};
use crate::matrix::{Matrix, Scalar};
use crate::mixed;
use crate::precision::PrecisionPolicy;
use crate::rcholqr::{check_sketch, sketched_block_qr, BlockSource};
use crate::sketch::SketchOperator;

type ExtractorFn<'a, T> = Box<dyn Fn(&Matrix<T>) -> Matrix<T> + Send + Sync + 'a>;

/// Linear map `L: ℝᵐ → ℝˡ`.
pub enum Extractor<'a, T: Scalar> {
    Dense(Matrix<T>),
    /// Applies `L` to an `m x b` block; `l` is the output dimension.
    Callback { l: usize, apply: ExtractorFn<'a, T> },
}

impl<'a, T: Scalar> Extractor<'a, T> {
    pub fn dense(l: Matrix<T>) -> Self {
        Extractor::Dense(l)
    }

    pub fn callback(l: usize, apply: impl Fn(&Matrix<T>) -> Matrix<T> + Send + Sync + 'a) -> Self {
        Extractor::Callback {
            l,
            apply: Box::new(apply),
        }
    }

    /// Rows `idx` of the identity.
    pub fn selector(m: usize, idx: &[usize]) -> Self {
        let mut l = Matrix::zeros(idx.len(), m);
        for (r, &i) in idx.iter().enumerate() {
            l.set(r, i, T::ONE);
        }
        Extractor::Dense(l)
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Extractor::Dense(l) => l.rows(),
            Extractor::Callback { l, .. } => *l,
        }
    }

    pub fn apply(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let y = match self {
            Extractor::Dense(l) => {
                if l.cols() != x.rows() {
                    return Err(Error::DimensionMismatch(format!(
                        "extractor maps from dimension {}, X has {} rows",
                        l.cols(),
                        x.rows()
                    )));
                }
                l.matmul(x)
            }
            Extractor::Callback { apply, .. } => apply(x),
        };
        if y.rows() != self.output_dim() || y.cols() != x.cols() {
            return Err(Error::DimensionMismatch(format!(
                "extractor returned {}x{}, expected {}x{}",
                y.rows(),
                y.cols(),
                self.output_dim(),
                x.cols()
            )));
        }
        Ok(y)
    }
}

/// Column-wise read access to a tall matrix.
pub trait ColumnAccess<T: Scalar> {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn column(&self, j: usize) -> Matrix<T>;
}

impl<T: Scalar> ColumnAccess<T> for Matrix<T> {
    fn rows(&self) -> usize {
        Matrix::rows(self)
    }

    fn cols(&self) -> usize {
        Matrix::cols(self)
    }

    fn column(&self, j: usize) -> Matrix<T> {
        self.columns(j..j + 1)
    }
}

/// `(Z, S, R)` with `Z ≈ L Q`, `S ≈ ΘQ`, `X = Q R`.
#[derive(Clone, Debug)]
pub struct ReducedFactors<T: Scalar> {
    pub z: Matrix<T>,
    pub s: Matrix<f64>,
    pub r: Matrix<T>,
}

/// Reduced RCholeskyQR: `P = ΘX` and `Y = LX` in one pass over the columns of
/// `X`, `P = S R`, and `Z = Y R⁻¹`.
pub fn red_rcholeskyqr<T: Scalar>(
    x: &dyn ColumnAccess<T>,
    theta: &SketchOperator,
    l: &Extractor<'_, T>,
    policy: &PrecisionPolicy,
) -> Result<ReducedFactors<T>> {
    policy.check_working::<T>()?;
    let (m, n) = (x.rows(), x.cols());
    if theta.m() != m {
        return Err(Error::DimensionMismatch(format!(
            "sketch maps from dimension {}, X has {m} rows",
            theta.m()
        )));
    }
    let mut p = Matrix::<f64>::zeros(theta.k(), n);
    let mut y = Matrix::<T>::zeros(l.output_dim(), n);
    for j in 0..n {
        let xj = x.column(j);
        p.set_columns(j, &mixed::sketch(theta, &xj, policy)?);
        y.set_columns(j, &l.apply(&xj)?);
    }
    let (s, r) = mixed::small_qr(&p, policy);
    let r_t: Matrix<T> = r.cast();
    let z = tri_solve_right(&y, &r_t)?;
    Ok(ReducedFactors { z, s, r: r_t })
}

/// Reduced column-oriented RCholeskyQR. The block generator receives
/// `(Z₍₁:ᵢ₋₁₎, R₍₁:ᵢ₋₁,₁:ᵢ₋₁₎)`; `Q` is never formed.
pub fn col_red_rcholeskyqr<T: Scalar>(
    mut src: BlockSource<'_, T>,
    theta: &SketchOperator,
    l: &Extractor<'_, T>,
    policy: &PrecisionPolicy,
) -> Result<ReducedFactors<T>> {
    policy.check_working::<T>()?;
    let mut z = Matrix::<T>::zeros(l.output_dim(), 0);
    let mut s = Matrix::<f64>::zeros(theta.k(), 0);
    let mut r = Matrix::<f64>::zeros(0, 0);
    for i in 0..src.block_count.max(1) {
        let x = if i == 0 {
            src.first_block.clone()
        } else {
            (src.generator)(&z, &r.cast())?
        };
        check_sketch(&x, theta)?;
        let (c, b) = (z.cols(), x.cols());
        if c + b > theta.k() {
            return Err(Error::DimensionMismatch(format!(
                "basis width {} exceeds sketch dimension {}",
                c + b,
                theta.k()
            )));
        }
        let p = mixed::sketch(theta, &x, policy)?;
        let y = l.apply(&x)?;
        let (r_col, s_i, r_ii) = sketched_block_qr(&s, &p, policy)?;
        let resid = if c > 0 { y.sub(&z.matmul(&r_col.cast())) } else { y };
        let z_i = tri_solve_right(&resid, &r_ii.cast())?;
        let mut rn = Matrix::zeros(c + b, c + b);
        rn.set_block(0, 0, &r);
        rn.set_block(0, c, &r_col);
        rn.set_block(c, c, &r_ii);
        r = rn;
        s = s.hcat(&s_i);
        z = z.hcat(&z_i);
    }
    Ok(ReducedFactors { z, s, r: r.cast() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReducedMode {
    Galerkin,
    Minres,
}

#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub a_red: Matrix<f64>,
    pub b_red: Matrix<f64>,
    pub mode: ReducedMode,
}

impl ReducedSystem {
    /// Solves `A_red a = b_red` by Householder QR.
    pub fn solve(&self) -> Result<Matrix<f64>> {
        least_squares(&self.a_red, &self.b_red)
    }
}

/// Galerkin: `A_red = (ΦQ)ᵀ(ΦAQ)`, `b_red = (ΦQ)ᵀΦb`.
/// Minres: `A_red = (ΦAQ)ᵀ(ΦAQ)`, `b_red = (ΦAQ)ᵀΦb`.
pub fn build_reduced_system(
    sq: &Matrix<f64>,
    saq: &Matrix<f64>,
    sb: &Matrix<f64>,
    mode: ReducedMode,
) -> Result<ReducedSystem> {
    if sq.shape() != saq.shape() || sb.rows() != sq.rows() {
        return Err(Error::DimensionMismatch(format!(
            "ΦQ is {}x{}, ΦAQ is {}x{}, Φb has {} rows",
            sq.rows(),
            sq.cols(),
            saq.rows(),
            saq.cols(),
            sb.rows()
        )));
    }
    let left = match mode {
        ReducedMode::Galerkin => sq,
        ReducedMode::Minres => saq,
    };
    Ok(ReducedSystem {
        a_red: left.tr_matmul(saq),
        b_red: left.tr_matmul(sb),
        mode,
    })
}
