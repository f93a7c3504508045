use crate::error::{Error, Result};
use crate::matrix::{axpy, Matrix, Scalar};

fn check_square_nonsingular<T: Scalar>(r: &Matrix<T>) -> Result<()> {
    if r.rows() != r.cols() {
        return Err(Error::DimensionMismatch(format!(
            "triangular factor must be square, got {}x{}",
            r.rows(),
            r.cols()
        )));
    }
    for i in 0..r.rows() {
        let d = r.get(i, i);
        if d == T::ZERO || !d.is_finite() {
            return Err(Error::SingularTriangular { index: i });
        }
    }
    Ok(())
}

/// `X R⁻¹` for upper-triangular `R`, by substitution over the columns of `X`.
/// `R⁻¹` is never formed.
pub fn tri_solve_right<T: Scalar>(x: &Matrix<T>, r: &Matrix<T>) -> Result<Matrix<T>> {
    check_square_nonsingular(r)?;
    if x.cols() != r.rows() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} columns, R is {}x{}",
            x.cols(),
            r.rows(),
            r.cols()
        )));
    }
    let m = x.rows();
    let mut q = x.clone();
    for j in 0..r.cols() {
        let (done, qj) = q.split_col_mut(j);
        for i in 0..j {
            let rij = r.get(i, j);
            if rij != T::ZERO {
                axpy(-rij, &done[i * m..(i + 1) * m], qj);
            }
        }
        let d = r.get(j, j);
        for v in qj.iter_mut() {
            *v /= d;
        }
    }
    Ok(q)
}

/// `R⁻¹ Y` for upper-triangular `R`, by back substitution.
pub fn upper_solve<T: Scalar>(r: &Matrix<T>, y: &Matrix<T>) -> Result<Matrix<T>> {
    check_square_nonsingular(r)?;
    let n = r.rows();
    if y.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "R is {n}x{n}, right-hand side has {} rows",
            y.rows()
        )));
    }
    let mut x = y.clone();
    for c in 0..y.cols() {
        let col = x.col_mut(c);
        for i in (0..n).rev() {
            let mut s = col[i];
            for l in i + 1..n {
                s -= r.get(i, l) * col[l];
            }
            col[i] = s / r.get(i, i);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row() {
        let x = Matrix::<f64>::from_rows(&[&[2.0, 1.0]]);
        let r = Matrix::<f64>::from_rows(&[&[2.0, 1.0], &[0.0, 1.0]]);
        assert_eq!(tri_solve_right(&x, &r).unwrap(), Matrix::from_rows(&[&[1.0, 0.0]]));
    }

    #[test]
    fn identity_factor() {
        let x = Matrix::<f64>::from_fn(5, 3, |i, j| (i * 3 + j) as f64 - 4.5);
        assert_eq!(tri_solve_right(&x, &Matrix::identity(3)).unwrap(), x);
    }

    #[test]
    fn zero_pivot() {
        let x = Matrix::<f64>::zeros(3, 2);
        let r = Matrix::<f64>::from_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            tri_solve_right(&x, &r),
            Err(Error::SingularTriangular { index: 1 })
        ));
        assert!(matches!(
            upper_solve(&r, &Matrix::zeros(2, 1)),
            Err(Error::SingularTriangular { index: 1 })
        ));
    }

    #[test]
    fn back_substitution() {
        let r = Matrix::<f64>::from_rows(&[&[2.0, 1.0], &[0.0, 4.0]]);
        let y = Matrix::<f64>::from_rows(&[&[5.0], &[8.0]]);
        assert_eq!(upper_solve(&r, &y).unwrap(), Matrix::from_rows(&[&[1.5], &[2.0]]));
    }
}
