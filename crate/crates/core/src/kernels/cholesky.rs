use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix, Scalar};

/// Upper Cholesky factor `R` with `RᵀR = A`.
///
/// `A` is symmetrized first. A pivot that is not strictly positive (or not
/// finite) reports [`Error::NotPositiveDefinite`].
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let a = a.symmetrize();
    let mut r = Matrix::<T>::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let s = {
                let ri = &r.col(i)[..i];
                let rj = &r.col(j)[..i];
                dot(ri, rj)
            };
            let v = (a.get(i, j) - s) / r.get(i, i);
            r.set(i, j, v);
        }
        let rj = &r.col(j)[..j];
        let d = a.get(j, j) - dot(rj, rj);
        if !(d > T::ZERO) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: d.to_f64(),
            });
        }
        r.set(j, j, d.sqrt());
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let a = Matrix::<f64>::from_rows(&[&[4.0, 2.0], &[2.0, 5.0]]);
        let r = cholesky(&a).unwrap();
        assert_eq!(r, Matrix::from_rows(&[&[2.0, 1.0], &[0.0, 2.0]]));
        assert_eq!(r.transpose().matmul(&r), a);
    }

    #[test]
    fn identity() {
        let i3 = Matrix::<f64>::identity(3);
        assert_eq!(cholesky(&i3).unwrap(), i3);
    }

    #[test]
    fn indefinite() {
        let a = Matrix::<f64>::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            cholesky(&a),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn uses_symmetric_part() {
        let a = Matrix::<f64>::from_rows(&[&[4.0, 1.0], &[3.0, 5.0]]);
        let r = cholesky(&a).unwrap();
        assert_eq!(r, Matrix::from_rows(&[&[2.0, 1.0], &[0.0, 2.0]]));
    }
}
