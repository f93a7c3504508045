use crate::error::{Error, Result};
use crate::matrix::Scalar;

/// Unnormalized in-place Walsh–Hadamard butterflies (`H v` with `H` entries ±1).
pub(crate) fn fwht_unnormalized<T: Scalar>(v: &mut [T]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (s, d) = (*x + *y, *x - *y);
                *x = s;
                *y = d;
            }
        }
        h *= 2;
    }
}

/// Orthonormal fast Walsh–Hadamard transform, in place.
pub fn fwht<T: Scalar>(v: &mut [T]) -> Result<()> {
    let n = v.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::LengthNotPowerOfTwo(n));
    }
    fwht_unnormalized(v);
    let scale = T::ONE / T::from_f64(n as f64).sqrt();
    for x in v.iter_mut() {
        *x *= scale;
    }
    Ok(())
}
