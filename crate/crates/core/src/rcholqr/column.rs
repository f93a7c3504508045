use crate::error::{Error, Result};
use crate::kernels::tri_solve_right;
use crate::matrix::{Matrix, Scalar};
use crate::mixed;
use crate::precision::PrecisionPolicy;
use crate::sketch::SketchOperator;

use super::factors::QRFactors;

type Generator<'a, T> = Box<dyn FnMut(&Matrix<T>, &Matrix<T>) -> Result<Matrix<T>> + 'a>;

/// Produces the column blocks `X₍ᵢ₎` of a matrix that may depend on the
/// already computed `Q₍₁:ᵢ₋₁₎` and `R₍₁:ᵢ₋₁,₁:ᵢ₋₁₎`, as in Arnoldi.
pub struct BlockSource<'a, T: Scalar> {
    pub first_block: Matrix<T>,
    /// Called with `(Q₍₁:ᵢ₋₁₎, R₍₁:ᵢ₋₁,₁:ᵢ₋₁₎)`.
    pub generator: Generator<'a, T>,
    pub block_count: usize,
}

impl<'a, T: Scalar> BlockSource<'a, T> {
    pub fn new(
        first_block: Matrix<T>,
        block_count: usize,
        generator: impl FnMut(&Matrix<T>, &Matrix<T>) -> Result<Matrix<T>> + 'a,
    ) -> Self {
        Self {
            first_block,
            generator: Box::new(generator),
            block_count,
        }
    }

    /// Splits a fixed matrix into `p` column blocks of near-equal width.
    pub fn from_matrix(x: &'a Matrix<T>, p: usize) -> Self {
        let n = x.cols();
        let p = p.clamp(1, n.max(1));
        let bounds: Vec<usize> = (0..=p).map(|i| i * n / p).collect();
        let first = x.columns(bounds[0]..bounds[1]);
        let mut next = 1;
        Self::new(first, p, move |_, _| {
            let b = x.columns(bounds[next]..bounds[next + 1]);
            next += 1;
            Ok(b)
        })
    }
}

/// Incremental column-oriented RCholeskyQR. Each pushed block is sketched,
/// projected against the sketches of the previous blocks by least squares,
/// orthonormalized in the sketched inner product by a small QR, and the
/// corresponding block of `Q` is formed by block forward substitution.
///
/// With `rgs_update`, the sketch of the previous `Q` block is recomputed as
/// `ΘQ₍ᵢ₋₁₎` before projecting (randomized Gram–Schmidt).
pub struct ColumnRcholQr<'a, T: Scalar> {
    theta: &'a SketchOperator,
    policy: PrecisionPolicy,
    rgs_update: bool,
    q: Matrix<T>,
    s: Matrix<f64>,
    r: Matrix<f64>,
    blocks: Vec<usize>,
    sketches: Vec<Matrix<f64>>,
}

impl<'a, T: Scalar> ColumnRcholQr<'a, T> {
    pub fn new(theta: &'a SketchOperator, policy: PrecisionPolicy, rgs_update: bool) -> Result<Self> {
        policy.check_working::<T>()?;
        Ok(Self {
            theta,
            policy,
            rgs_update,
            q: Matrix::zeros(theta.m(), 0),
            s: Matrix::zeros(theta.k(), 0),
            r: Matrix::zeros(0, 0),
            blocks: vec![0],
            sketches: Vec::new(),
        })
    }

    pub fn width(&self) -> usize {
        self.q.cols()
    }

    pub fn q(&self) -> &Matrix<T> {
        &self.q
    }

    pub fn s(&self) -> &Matrix<f64> {
        &self.s
    }

    pub fn r(&self) -> Matrix<T> {
        self.r.cast()
    }

    /// Column offsets of the blocks pushed so far, starting with 0.
    pub fn block_offsets(&self) -> &[usize] {
        &self.blocks
    }

    /// `ΘX₍ᵢ₎` for every pushed block.
    pub fn block_sketches(&self) -> &[Matrix<f64>] {
        &self.sketches
    }

    /// Orthogonalizes `x` against the current basis and appends it. Returns the new `Q` block.
    pub fn push_block(&mut self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let pol = self.policy;
        let (m, c, b) = (self.theta.m(), self.width(), x.cols());
        if x.rows() != m {
            return Err(Error::DimensionMismatch(format!("block has {} rows, expected {m}", x.rows())));
        }
        if c + b > self.theta.k() {
            return Err(Error::DimensionMismatch(format!(
                "basis width {} exceeds sketch dimension {}",
                c + b,
                self.theta.k()
            )));
        }
        let p = mixed::sketch(self.theta, x, &pol)?;
        if self.rgs_update && self.blocks.len() > 1 {
            let lo = self.blocks[self.blocks.len() - 2];
            let fresh = mixed::sketch(self.theta, &self.q.columns(lo..c), &pol)?;
            self.s.set_columns(lo, &fresh);
        }
        let (r_col, s_i, r_ii) = sketched_block_qr(&self.s, &p, &pol)?;
        let r_ii_t: Matrix<T> = r_ii.cast();
        let residual = if c > 0 { x.sub(&self.q.matmul(&r_col.cast())) } else { x.clone() };
        let q_i = tri_solve_right(&residual, &r_ii_t)?;

        let mut r = Matrix::zeros(c + b, c + b);
        r.set_block(0, 0, &self.r);
        r.set_block(0, c, &r_col);
        r.set_block(c, c, &r_ii);
        self.r = r;
        self.s = self.s.hcat(&s_i);
        self.q = self.q.hcat(&q_i);
        self.blocks.push(c + b);
        self.sketches.push(p);
        Ok(q_i)
    }

    pub fn into_factors(self) -> QRFactors<T> {
        let r = self.r.cast();
        QRFactors::explicit(self.q, Some(self.s), r)
    }
}

/// Steps 3–4 of the column-oriented algorithm: `R₍₁:ᵢ₋₁,ᵢ₎ = S†P` (as `SᵀP` plus
/// one refinement pass, `S` having orthonormal columns) and the small QR of the
/// sketched remainder. Returns `(R₍₁:ᵢ₋₁,ᵢ₎, Sᵢ, Rᵢᵢ)`.
pub(crate) fn sketched_block_qr(
    s: &Matrix<f64>,
    p: &Matrix<f64>,
    pol: &PrecisionPolicy,
) -> Result<(Matrix<f64>, Matrix<f64>, Matrix<f64>)> {
    let (c, b) = (s.cols(), p.cols());
    let (r_col, rem) = if c > 0 {
        let mut r_col = mixed::small_tr_matmul(s, p, pol);
        let mut rem = mixed::small_sub(p, &mixed::small_matmul(s, &r_col, pol), pol);
        let delta = mixed::small_tr_matmul(s, &rem, pol);
        r_col = r_col.add(&delta);
        rem = mixed::small_sub(&rem, &mixed::small_matmul(s, &delta, pol), pol);
        (r_col, rem)
    } else {
        (Matrix::zeros(0, b), p.clone())
    };
    let (s_i, r_ii) = mixed::small_qr(&rem, pol);
    if let Some(j) = r_ii.diag().iter().position(|&d| d == 0.0) {
        return Err(Error::SingularTriangular { index: c + j });
    }
    Ok((r_col, s_i, r_ii))
}

/// Column-oriented RCholeskyQR over the blocks of `src`.
pub fn col_rcholeskyqr<T: Scalar>(
    mut src: BlockSource<'_, T>,
    theta: &SketchOperator,
    policy: &PrecisionPolicy,
    rgs_update: bool,
) -> Result<QRFactors<T>> {
    let mut qr = ColumnRcholQr::new(theta, *policy, rgs_update)?;
    qr.push_block(&src.first_block)?;
    for _ in 1..src.block_count {
        let x = (src.generator)(qr.q(), &qr.r())?;
        qr.push_block(&x)?;
    }
    Ok(qr.into_factors())
}
