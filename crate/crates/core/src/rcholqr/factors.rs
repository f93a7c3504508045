use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::kernels::{tri_solve_right, upper_solve};
use crate::matrix::{Matrix, Scalar};

/// `Q = base · R′⁻¹`, kept in factored form.
#[derive(Clone, Debug)]
pub struct ImplicitQ<T: Scalar> {
    pub base: Matrix<T>,
    pub r_prime: Matrix<T>,
}

impl<T: Scalar> ImplicitQ<T> {
    pub fn new(base: Matrix<T>, r_prime: Matrix<T>) -> Result<Self> {
        if r_prime.rows() != r_prime.cols() || r_prime.rows() != base.cols() {
            return Err(Error::DimensionMismatch(format!(
                "base is {}x{}, R' is {}x{}",
                base.rows(),
                base.cols(),
                r_prime.rows(),
                r_prime.cols()
            )));
        }
        Ok(Self { base, r_prime })
    }

    pub fn rows(&self) -> usize {
        self.base.rows()
    }

    pub fn cols(&self) -> usize {
        self.base.cols()
    }

    /// `Q Y = base (R′⁻¹ Y)`.
    pub fn apply_right(&self, y: &Matrix<T>) -> Result<Matrix<T>> {
        Ok(self.base.matmul(&upper_solve(&self.r_prime, y)?))
    }

    /// `Y Q = (Y base) R′⁻¹`.
    pub fn apply_left(&self, y: &Matrix<T>) -> Result<Matrix<T>> {
        if y.cols() != self.base.rows() {
            return Err(Error::DimensionMismatch(format!(
                "Y has {} columns, Q has {} rows",
                y.cols(),
                self.base.rows()
            )));
        }
        let yb = y.transpose().tr_matmul(&self.base);
        tri_solve_right(&yb, &self.r_prime)
    }

    pub fn to_explicit(&self) -> Result<Matrix<T>> {
        tri_solve_right(&self.base, &self.r_prime)
    }
}

pub fn implicitq_apply_right<T: Scalar>(h: &ImplicitQ<T>, y: &Matrix<T>) -> Result<Matrix<T>> {
    h.apply_right(y)
}

pub fn implicitq_apply_left<T: Scalar>(y: &Matrix<T>, h: &ImplicitQ<T>) -> Result<Matrix<T>> {
    h.apply_left(y)
}

#[derive(Clone, Debug)]
pub enum QFactor<T: Scalar> {
    Explicit(Matrix<T>),
    Implicit(ImplicitQ<T>),
}

/// `X = Q R`, with the sketch `S ≈ ΘQ` when the method produces one.
///
/// `S` is held in binary64; its entries are exact values of the precision it
/// was computed in.
#[derive(Clone, Debug)]
pub struct QRFactors<T: Scalar> {
    pub q: QFactor<T>,
    pub s: Option<Matrix<f64>>,
    pub r: Matrix<T>,
}

impl<T: Scalar> QRFactors<T> {
    pub fn explicit(q: Matrix<T>, s: Option<Matrix<f64>>, r: Matrix<T>) -> Self {
        Self {
            q: QFactor::Explicit(q),
            s,
            r,
        }
    }

    /// `Q` as a dense matrix, materializing it if it is implicit.
    pub fn q(&self) -> Result<Cow<'_, Matrix<T>>> {
        match &self.q {
            QFactor::Explicit(q) => Ok(Cow::Borrowed(q)),
            QFactor::Implicit(h) => Ok(Cow::Owned(h.to_explicit()?)),
        }
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self.q, QFactor::Implicit(_))
    }
}
