use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, Matrix, Permutation, Scalar};

use super::triangular::upper_solve;

/// Householder QR in factored form: reflectors below the diagonal of `packed`,
/// `R` on and above it.
#[derive(Clone, Debug)]
pub struct HouseholderQr<T: Scalar> {
    packed: Matrix<T>,
    taus: Vec<T>,
    /// `-1` where the raw reflector produced a negative diagonal; flipped to keep `diag(R) >= 0`.
    signs: Vec<T>,
}

impl<T: Scalar> HouseholderQr<T> {
    pub fn new(a: &Matrix<T>) -> Self {
        Self::factor(a, false).0
    }

    /// Householder QR with greedy column pivoting: at each step the remaining
    /// column of largest norm moves forward (ties go to the lowest index).
    pub fn with_pivoting(a: &Matrix<T>) -> (Self, Permutation) {
        Self::factor(a, true)
    }

    fn factor(a: &Matrix<T>, pivot: bool) -> (Self, Permutation) {
        let (k, n) = a.shape();
        let p = k.min(n);
        let mut packed = a.clone();
        let mut perm = Permutation::identity(n);
        let mut taus = Vec::with_capacity(p);
        let mut signs = Vec::with_capacity(p);
        for j in 0..p {
            if pivot {
                let mut best = j;
                let mut best_norm = norm2(&packed.col(j)[j..]);
                for l in j + 1..n {
                    let nl = norm2(&packed.col(l)[j..]);
                    if nl > best_norm {
                        best_norm = nl;
                        best = l;
                    }
                }
                if best != j {
                    swap_columns(&mut packed, j, best);
                    perm.swap(j, best);
                }
            }
            let (tau, beta) = {
                let col = &mut packed.col_mut(j)[j..];
                let alpha = norm2(col);
                if alpha == T::ZERO {
                    (T::ZERO, T::ZERO)
                } else {
                    let x0 = col[0];
                    let beta = if x0 >= T::ZERO { -alpha } else { alpha };
                    let denom = x0 - beta;
                    for v in col[1..].iter_mut() {
                        *v /= denom;
                    }
                    col[0] = T::ONE;
                    ((beta - x0) / beta, beta)
                }
            };
            if tau != T::ZERO {
                let (head, tail) = packed.as_mut_slice().split_at_mut((j + 1) * k);
                let v = &head[j * k + j..(j + 1) * k];
                for l in 0..n - j - 1 {
                    let c = &mut tail[l * k + j..(l + 1) * k];
                    let w = dot(v, c) * tau;
                    axpy(-w, v, c);
                }
            }
            // v0 = 1 is implicit; store R_jj in its place.
            packed.set(j, j, beta);
            taus.push(tau);
            signs.push(if beta < T::ZERO { -T::ONE } else { T::ONE });
        }
        (
            Self {
                packed,
                taus,
                signs,
            },
            perm,
        )
    }

    pub fn rank_bound(&self) -> usize {
        self.taus.len()
    }

    /// Upper-triangular (or trapezoidal) `min(k,n) x n` factor with nonnegative diagonal.
    pub fn r(&self) -> Matrix<T> {
        let (_, n) = self.packed.shape();
        let p = self.taus.len();
        Matrix::from_fn(p, n, |i, j| {
            if i <= j {
                self.signs[i] * self.packed.get(i, j)
            } else {
                T::ZERO
            }
        })
    }

    fn reflect(&self, j: usize, c: &mut [T]) {
        let tau = self.taus[j];
        if tau == T::ZERO {
            return;
        }
        let k = self.packed.rows();
        let v = &self.packed.col(j)[j..k];
        let cj = &mut c[j..k];
        let w = (cj[0] + dot(&v[1..], &cj[1..])) * tau;
        cj[0] -= w;
        axpy(-w, &v[1..], &mut cj[1..]);
    }

    /// Thin orthonormal factor `k x min(k,n)`, sign-matched to [`HouseholderQr::r`].
    pub fn q_thin(&self) -> Matrix<T> {
        let k = self.packed.rows();
        let p = self.taus.len();
        let mut q = Matrix::eye(k, p);
        for c in 0..p {
            let col = q.col_mut(c);
            for j in (0..p).rev() {
                self.reflect(j, col);
            }
        }
        for c in 0..p {
            let s = self.signs[c];
            if s != T::ONE {
                for v in q.col_mut(c) {
                    *v = -*v;
                }
            }
        }
        q
    }

    /// `Qᵀ B` restricted to the leading `min(k,n)` rows, sign-matched to `R`.
    pub fn apply_qt(&self, b: &Matrix<T>) -> Matrix<T> {
        let k = self.packed.rows();
        assert_eq!(b.rows(), k);
        let p = self.taus.len();
        let mut w = b.clone();
        for c in 0..w.cols() {
            let col = w.col_mut(c);
            for j in 0..p {
                self.reflect(j, col);
            }
        }
        Matrix::from_fn(p, b.cols(), |i, j| self.signs[i] * w.get(i, j))
    }
}

pub(crate) fn swap_columns<T: Scalar>(m: &mut Matrix<T>, a: usize, b: usize) {
    if a == b {
        return;
    }
    let rows = m.rows();
    let (lo, hi) = (a.min(b), a.max(b));
    let (x, y) = m.as_mut_slice().split_at_mut(hi * rows);
    x[lo * rows..(lo + 1) * rows].swap_with_slice(&mut y[..rows]);
}

/// Thin Householder QR `P = S R` with `SᵀS = I` and `diag(R) >= 0`.
///
/// For `k >= n` this returns `S` of shape `k x n` and `R` of shape `n x n`.
/// Rank deficiency shows up as zero diagonal entries of `R`.
pub fn householder_qr<T: Scalar>(p: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let f = HouseholderQr::new(p);
    (f.q_thin(), f.r())
}

/// `R` factor only; skips forming the orthonormal factor.
pub fn householder_r<T: Scalar>(p: &Matrix<T>) -> Matrix<T> {
    HouseholderQr::new(p).r()
}

/// Least-squares solution of `min ‖A X − B‖_F` for full-column-rank `A` (`k >= n`).
pub fn least_squares<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows, B has {}",
            a.rows(),
            b.rows()
        )));
    }
    if a.rows() < a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "least squares needs a tall matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let f = HouseholderQr::new(a);
    let qtb = f.apply_qt(b);
    upper_solve(&f.r(), &qtb).map_err(|e| match e {
        Error::SingularTriangular { .. } => Error::RankDeficient,
        e => e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(rows: usize, cols: usize, mut state: u64) -> Matrix<f64> {
        Matrix::from_fn(rows, cols, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn three_four_five() {
        let p = Matrix::<f64>::from_rows(&[&[3.0], &[4.0]]);
        let (s, r) = householder_qr(&p);
        assert_eq!(r.get(0, 0), 5.0);
        assert!((s.get(0, 0) - 0.6).abs() < 1e-15);
        assert!((s.get(1, 0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn identity_is_fixed() {
        let i2 = Matrix::<f64>::identity(2);
        let (s, r) = householder_qr(&i2);
        assert_eq!(s, i2);
        assert_eq!(r, i2);
    }

    #[test]
    fn random_residual_and_orthogonality() {
        let p = lcg_matrix(20, 5, 42);
        let (s, r) = householder_qr(&p);
        let res = s.matmul(&r).sub(&p).frobenius_norm();
        let orth = s.gram().sub(&Matrix::identity(5)).frobenius_norm();
        assert!(res <= 1e-14 * p.frobenius_norm(), "{res}");
        assert!(orth <= 1e-14, "{orth}");
        assert!(r.is_upper_triangular());
        assert!(r.diag().iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn rank_deficient_gives_zero_diagonal() {
        let p = Matrix::<f64>::from_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[0.0, 0.0]]);
        let r = householder_r(&p);
        assert!(r.get(1, 1).abs() < 1e-15);
    }

    #[test]
    fn wide_matrix_is_trapezoidal() {
        let p = lcg_matrix(3, 5, 7);
        let (s, r) = householder_qr(&p);
        assert_eq!(s.shape(), (3, 3));
        assert_eq!(r.shape(), (3, 5));
        assert!(s.matmul(&r).sub(&p).frobenius_norm() < 1e-14);
    }

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = lcg_matrix(12, 4, 3);
        let x = lcg_matrix(4, 2, 9);
        let b = a.matmul(&x);
        let got = least_squares(&a, &b).unwrap();
        assert!(got.sub(&x).max_abs() < 1e-12);
    }
}
