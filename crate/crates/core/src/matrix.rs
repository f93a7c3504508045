//! Column-major dense matrices over `f32`/`f64`.
//!
//! Every algorithm in this crate works on column blocks, so columns are the
//! contiguous unit of storage. [`Matrix`] is generic over the scalar type and
//! carries its precision in the type; [`DenseMatrix`] erases it for I/O.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// IEEE binary format of a matrix or of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    Binary32,
    Binary64,
}

impl Precision {
    /// Unit roundoff: half the machine epsilon.
    pub fn unit_roundoff(self) -> f64 {
        match self {
            Precision::Binary32 => 2f64.powi(-24),
            Precision::Binary64 => 2f64.powi(-53),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Precision::Binary32 => "f32",
            Precision::Binary64 => "f64",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Real scalar usable as matrix storage.
pub trait Scalar:
    num_like::Float + fmt::Debug + fmt::Display + Default + Send + Sync + 'static
{
    const PRECISION: Precision;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

/// Minimal float arithmetic surface the kernels need.
pub mod num_like {
    use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

    pub trait Float:
        Copy
        + PartialOrd
        + Add<Output = Self>
        + Sub<Output = Self>
        + Mul<Output = Self>
        + Div<Output = Self>
        + Neg<Output = Self>
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
    {
        const ZERO: Self;
        const ONE: Self;
        fn sqrt(self) -> Self;
        fn abs(self) -> Self;
        fn hypot(self, other: Self) -> Self;
        fn is_finite(self) -> bool;
        fn max(self, other: Self) -> Self;
        fn mul_add(self, a: Self, b: Self) -> Self;
    }

    macro_rules! impl_float {
        ($t:ty) => {
            impl Float for $t {
                const ZERO: Self = 0.0;
                const ONE: Self = 1.0;
                #[inline]
                fn sqrt(self) -> Self {
                    <$t>::sqrt(self)
                }
                #[inline]
                fn abs(self) -> Self {
                    <$t>::abs(self)
                }
                #[inline]
                fn hypot(self, other: Self) -> Self {
                    <$t>::hypot(self, other)
                }
                #[inline]
                fn is_finite(self) -> bool {
                    <$t>::is_finite(self)
                }
                #[inline]
                fn max(self, other: Self) -> Self {
                    <$t>::max(self, other)
                }
                #[inline]
                fn mul_add(self, a: Self, b: Self) -> Self {
                    self * a + b
                }
            }
        };
    }
    impl_float!(f32);
    impl_float!(f64);
}

impl Scalar for f32 {
    const PRECISION: Precision = Precision::Binary32;
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    const PRECISION: Precision = Precision::Binary64;
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

/// Dot product with four independent accumulators (fixed summation order).
#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let chunks = n / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (T::ZERO, T::ZERO, T::ZERO, T::ZERO);
    for c in 0..chunks {
        let i = 4 * c;
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    let mut tail = T::ZERO;
    for i in 4 * chunks..n {
        tail += a[i] * b[i];
    }
    ((s0 + s1) + (s2 + s3)) + tail
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Euclidean norm with scaling against overflow/underflow.
pub fn norm2<T: Scalar>(x: &[T]) -> T {
    let scale = x.iter().fold(T::ZERO, |acc, &v| acc.max(v.abs()));
    if scale == T::ZERO || !scale.is_finite() {
        return scale;
    }
    let mut ss = T::ZERO;
    for &v in x {
        let t = v / scale;
        ss += t * t;
    }
    scale * ss.sqrt()
}

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix<{}> {}x{}", T::PRECISION, self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row: Vec<String> = (0..self.cols.min(8))
                .map(|j| format!("{:>12.4e}", self.get(i, j).to_f64()))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::ONE);
        }
        m
    }

    /// The leading `cols` columns of the `rows x rows` identity.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m.set(i, i, T::ONE);
        }
        m
    }

    /// Builds a matrix from external column-major data, rejecting bad lengths and non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos % rows.max(1),
                col: pos / rows.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Row-major literal, convenient in tests. Panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| T::from_f64(rows[i][j]))
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Mutable column `j` together with read access to all columns before it.
    #[inline]
    pub fn split_col_mut(&mut self, j: usize) -> (&[T], &mut [T]) {
        let (head, tail) = self.data.split_at_mut(j * self.rows);
        (head, &mut tail[..self.rows])
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn columns(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.cols);
        Self {
            rows: self.rows,
            cols: range.len(),
            data: self.data[range.start * self.rows..range.end * self.rows].to_vec(),
        }
    }

    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        assert!(rows.end <= self.rows && cols.end <= self.cols);
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self.get(rows.start + i, cols.start + j)
        })
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Self {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j))
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hcat row mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        }
    }

    /// Vertical concatenation.
    pub fn vcat(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "vcat column mismatch");
        Self::from_fn(self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.get(i, j)
            } else {
                other.get(i - self.rows, j)
            }
        })
    }

    pub fn set_columns(&mut self, start: usize, block: &Self) {
        assert_eq!(self.rows, block.rows);
        assert!(start + block.cols <= self.cols);
        self.data[start * self.rows..(start + block.cols) * self.rows]
            .copy_from_slice(&block.data);
    }

    pub fn set_block(&mut self, row0: usize, col0: usize, block: &Self) {
        for j in 0..block.cols {
            for i in 0..block.rows {
                self.set(row0 + i, col0 + j, block.get(i, j));
            }
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.cast()
    }

    /// `self * other`
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimension");
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = out.col_mut(j);
            for l in 0..self.cols {
                let b = other.get(l, j);
                if b != T::ZERO {
                    axpy(b, &self.data[l * self.rows..(l + 1) * self.rows], oc);
                }
            }
        }
        out
    }

    /// `selfᵀ * other`
    pub fn tr_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "tr_matmul row dimension");
        Self::from_fn(self.cols, other.cols, |i, j| dot(self.col(i), other.col(j)))
    }

    /// Gramian `selfᵀ self`, computing the upper triangle and mirroring it.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = dot(self.col(i), self.col(j));
                g.set(i, j, v);
                g.set(j, i, v);
            }
        }
        g
    }

    pub fn scale(&self, alpha: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * alpha).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> T {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::ZERO, |acc, &v| acc.max(v.abs()))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.cols).all(|j| (j + 1..self.rows).all(|i| self.get(i, j) == T::ZERO))
    }

    /// Symmetric part `(A + Aᵀ)/2`.
    pub fn symmetrize(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        let half = T::from_f64(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            if i == j {
                self.get(i, i)
            } else {
                (self.get(i, j) + self.get(j, i)) * half
            }
        })
    }
}

/// Matrix with its precision chosen at runtime (file I/O, CLI).
#[derive(Clone, Debug, PartialEq)]
pub enum DenseMatrix {
    F32(Matrix<f32>),
    F64(Matrix<f64>),
}

impl DenseMatrix {
    pub fn precision(&self) -> Precision {
        match self {
            DenseMatrix::F32(_) => Precision::Binary32,
            DenseMatrix::F64(_) => Precision::Binary64,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            DenseMatrix::F32(m) => m.shape(),
            DenseMatrix::F64(m) => m.shape(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        match self {
            DenseMatrix::F32(m) => m.to_f64(),
            DenseMatrix::F64(m) => m.clone(),
        }
    }

    pub fn to_precision(&self, p: Precision) -> DenseMatrix {
        match (self, p) {
            (DenseMatrix::F32(m), Precision::Binary64) => DenseMatrix::F64(m.cast()),
            (DenseMatrix::F64(m), Precision::Binary32) => DenseMatrix::F32(m.cast()),
            _ => self.clone(),
        }
    }
}

impl From<Matrix<f32>> for DenseMatrix {
    fn from(m: Matrix<f32>) -> Self {
        DenseMatrix::F32(m)
    }
}

impl From<Matrix<f64>> for DenseMatrix {
    fn from(m: Matrix<f64>) -> Self {
        DenseMatrix::F64(m)
    }
}

/// Column permutation: column `j` of `XΠ` is column `map[j]` of `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n {
                return Err(Error::InvalidPermutation(format!("index {v} out of range {n}")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutation(format!("index {v} repeated")));
            }
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (j, &v) in self.map.iter().enumerate() {
            inv[v] = j;
        }
        Self { map: inv }
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.map.swap(a, b);
    }

    /// `XΠ`
    pub fn apply_columns<T: Scalar>(&self, x: &Matrix<T>) -> Matrix<T> {
        assert_eq!(x.cols(), self.len());
        x.select_columns(&self.map)
    }

    /// `YΠᵀ`, undoing [`Permutation::apply_columns`].
    pub fn unapply_columns<T: Scalar>(&self, y: &Matrix<T>) -> Matrix<T> {
        assert_eq!(y.cols(), self.len());
        y.select_columns(&self.inverse().map)
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v)
    }
}
