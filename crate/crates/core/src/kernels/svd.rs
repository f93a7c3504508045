use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, Matrix, Scalar};

use super::householder::HouseholderQr;

const SWEEP_CAP: usize = 60;
const BASE_TOL: f64 = 1e-15;

/// `A = U diag(σ) Vᵀ` with `σ` descending. Always computed in binary64.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: Matrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: Matrix<f64>,
}

/// One-sided Jacobi on the columns of `w`, optionally accumulating the right rotations in `v`.
fn jacobi_sweeps(w: &mut Matrix<f64>, mut v: Option<&mut Matrix<f64>>) -> Result<()> {
    let (m, n) = w.shape();
    // Orthogonality of a converged pair is only measurable to about m·eps.
    let tol = BASE_TOL.max(m as f64 * f64::EPSILON);
    for _sweep in 0..SWEEP_CAP {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = dot(w.col(i), w.col(i));
                let beta = dot(w.col(j), w.col(j));
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(w.col(i), w.col(j));
                if gamma.abs() <= tol * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(w, i, j, c, s);
                if let Some(v) = v.as_deref_mut() {
                    rotate(v, i, j, c, s);
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NoConvergence { sweeps: SWEEP_CAP })
}

fn rotate(w: &mut Matrix<f64>, i: usize, j: usize, c: f64, s: f64) {
    let m = w.rows();
    let data = w.as_mut_slice();
    let (a, b) = data.split_at_mut(j * m);
    let ci = &mut a[i * m..(i + 1) * m];
    let cj = &mut b[..m];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

/// Reduce a tall matrix to its square `R` factor; singular values are unchanged.
fn precondition(a: &Matrix<f64>) -> (Option<HouseholderQr<f64>>, Matrix<f64>) {
    if a.rows() > a.cols() {
        let f = HouseholderQr::new(a);
        let r = f.r();
        (Some(f), r)
    } else {
        (None, a.clone())
    }
}

/// Singular values only, descending.
pub fn singular_values<T: Scalar>(a: &Matrix<T>) -> Result<Vec<f64>> {
    let a = if a.rows() >= a.cols() {
        a.to_f64()
    } else {
        a.to_f64().transpose()
    };
    let (_, mut w) = precondition(&a);
    jacobi_sweeps(&mut w, None)?;
    let mut s: Vec<f64> = (0..w.cols()).map(|j| norm2(w.col(j))).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Full thin SVD for oracle use. Not a performance path.
pub fn svd_small<T: Scalar>(a: &Matrix<T>) -> Result<SvdFactors> {
    let a64 = a.to_f64();
    if a64.rows() < a64.cols() {
        let t = svd_small(&a64.transpose())?;
        return Ok(SvdFactors {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }
    let (qr, mut w) = precondition(&a64);
    let n = w.cols();
    let mut v = Matrix::<f64>::identity(n);
    jacobi_sweeps(&mut w, Some(&mut v))?;

    let norms: Vec<f64> = (0..n).map(|j| norm2(w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let rows = w.rows();
    let mut u = Matrix::<f64>::zeros(rows, n);
    let mut sv = Vec::with_capacity(n);
    let mut vs = Matrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sv.push(s);
        vs.col_mut(dst).copy_from_slice(v.col(src));
        if s > 0.0 {
            for (o, &x) in u.col_mut(dst).iter_mut().zip(w.col(src)) {
                *o = x / s;
            }
        }
    }
    complete_basis(&mut u, &sv);
    let u = match qr {
        Some(f) => f.q_thin().matmul(&u),
        None => u,
    };
    Ok(SvdFactors {
        u,
        singular_values: sv,
        v: vs,
    })
}

/// Replace columns belonging to zero singular values by orthonormal completions.
fn complete_basis(u: &mut Matrix<f64>, sv: &[f64]) {
    let rows = u.rows();
    let mut next_e = 0;
    for c in 0..sv.len() {
        if sv[c] > 0.0 {
            continue;
        }
        while next_e < rows {
            let mut cand = vec![0.0; rows];
            cand[next_e] = 1.0;
            next_e += 1;
            for _ in 0..2 {
                for o in 0..u.cols() {
                    if o == c || (sv[o] == 0.0 && o > c) {
                        continue;
                    }
                    let h = dot(u.col(o), &cand);
                    for (x, &y) in cand.iter_mut().zip(u.col(o)) {
                        *x -= h * y;
                    }
                }
            }
            let nrm = norm2(&cand);
            if nrm > 0.5 {
                for (o, x) in u.col_mut(c).iter_mut().zip(&cand) {
                    *o = x / nrm;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form_2x2(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
        // σ² are the eigenvalues of AᵀA.
        let p = a * a + c * c;
        let q = a * b + c * d;
        let r = b * b + d * d;
        let tr = p + r;
        let disc = ((p - r) * (p - r) + 4.0 * q * q).sqrt();
        let s1 = ((tr + disc) / 2.0).max(0.0).sqrt();
        let det = (a * d - b * c).abs();
        let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
        (s1, s2)
    }

    #[test]
    fn diagonal_and_zero() {
        let s = svd_small(&Matrix::<f64>::from_diag(&[2.0, 1.0])).unwrap();
        assert_eq!(s.singular_values, vec![2.0, 1.0]);
        let z = svd_small(&Matrix::<f64>::zeros(3, 2)).unwrap();
        assert_eq!(z.singular_values, vec![0.0, 0.0]);
        assert!(z.u.gram().sub(&Matrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn permutation_matrix() {
        let p = Matrix::<f64>::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(singular_values(&p).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn all_ternary_2x2_against_closed_form() {
        let vals = [-1.0, 0.0, 1.0];
        for &a in &vals {
            for &b in &vals {
                for &c in &vals {
                    for &d in &vals {
                        let m = Matrix::<f64>::from_rows(&[&[a, b], &[c, d]]);
                        let s = svd_small(&m).unwrap().singular_values;
                        let (e1, e2) = closed_form_2x2(a, b, c, d);
                        assert!((s[0] - e1).abs() <= 1e-14, "{a} {b} {c} {d}: {s:?}");
                        assert!((s[1] - e2).abs() <= 1e-14, "{a} {b} {c} {d}: {s:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn reconstruction_tall_and_wide() {
        let mut st = 11u64;
        let a = Matrix::<f64>::from_fn(30, 7, |_, _| {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1);
            (st >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        });
        for m in [a.clone(), a.transpose()] {
            let f = svd_small(&m).unwrap();
            let us = Matrix::from_fn(f.u.rows(), f.u.cols(), |i, j| {
                f.u.get(i, j) * f.singular_values[j]
            });
            let rec = us.matmul(&f.v.transpose());
            assert!(rec.sub(&m).max_abs() <= 1e-13 * m.frobenius_norm());
            assert!(f.u.gram().sub(&Matrix::identity(7)).max_abs() < 1e-13);
            assert!(f.v.gram().sub(&Matrix::identity(7)).max_abs() < 1e-13);
            assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
