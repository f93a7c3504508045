use std::collections::HashSet;

use log::{debug, warn};

use crate::error::Result;
use crate::matrix::{norm2, Matrix, Permutation, Scalar};

use super::householder::{householder_qr, HouseholderQr};
use super::triangular::upper_solve;

/// `PΠ = S R` from a strong rank-revealing QR.
#[derive(Clone, Debug)]
pub struct RrqrFactors<T: Scalar> {
    pub s: Matrix<T>,
    pub r: Matrix<T>,
    pub perm: Permutation,
    /// Number of interchanges performed after column pivoting.
    pub swaps: usize,
}

/// Householder QR with greedy column pivoting. Returns `R` (nonnegative
/// diagonal) and the permutation.
pub fn pivoted_qr<T: Scalar>(p: &Matrix<T>) -> (Matrix<T>, Permutation) {
    let (f, perm) = HouseholderQr::with_pivoting(p);
    (f.r(), perm)
}

/// Strong rank-revealing QR (`f > 1`).
///
/// Column-pivoted QR is followed by interchanges between the leading and the
/// trailing block at every block size `r` until, for all `r`,
/// `(R₁₁⁻¹R₁₂)ᵢⱼ² + (γⱼ(R₂₂)/ωᵢ(R₁₁))² ≤ f²`. Each interchange multiplies
/// `|det R₁₁|` by more than `f`, and the condition implies `|(R₁₁⁻¹R₁₂)ᵢⱼ| ≤ f`.
/// Block sizes whose leading block is numerically singular are skipped.
///
/// Interchanges at different block sizes can undo each other. When a
/// permutation repeats, the block sizes are instead settled once each in
/// ascending order, so the bound is then guaranteed only for the largest sizes.
pub fn strong_rrqr<T: Scalar>(p: &Matrix<T>, f: f64) -> Result<RrqrFactors<T>> {
    assert!(f > 1.0, "strong RRQR needs f > 1");
    let (k, n) = p.shape();
    let (mut r, mut perm) = pivoted_qr(p);
    let steps = k.min(n);
    let f2 = f * f;
    let noise = 10.0 * T::PRECISION.unit_roundoff() * (k.max(n) as f64);
    let cap = 10 * n * n + 10;
    let mut swaps = 0;

    let mut seen = HashSet::new();
    seen.insert(perm.as_slice().to_vec());
    let mut cycled = false;
    'outer: loop {
        for rank in 1..=steps.min(n.saturating_sub(1)) {
            if leading_block_singular(&r, rank, noise) {
                break;
            }
            if let Some((i, j)) = worst_violation(&r, rank, f2)? {
                if swaps >= cap {
                    warn!("strong RRQR hit its interchange cap ({cap}); returning current pivoting");
                    break 'outer;
                }
                interchange(&mut r, &mut perm, i, rank + j);
                swaps += 1;
                if !seen.insert(perm.as_slice().to_vec()) {
                    cycled = true;
                    break 'outer;
                }
                continue 'outer;
            }
        }
        break;
    }
    if cycled {
        debug!("strong RRQR interchanges cycle across block sizes; settling sizes in ascending order");
        for rank in 1..=steps.min(n.saturating_sub(1)) {
            if leading_block_singular(&r, rank, noise) {
                break;
            }
            while let Some((i, j)) = worst_violation(&r, rank, f2)? {
                if swaps >= cap {
                    warn!("strong RRQR hit its interchange cap ({cap}); returning current pivoting");
                    break;
                }
                interchange(&mut r, &mut perm, i, rank + j);
                swaps += 1;
            }
        }
    }

    let permuted = perm.apply_columns(p);
    let (s, r) = householder_qr(&permuted);
    Ok(RrqrFactors { s, r, perm, swaps })
}

fn leading_block_singular<T: Scalar>(r: &Matrix<T>, rank: usize, noise: f64) -> bool {
    let r00 = r.get(0, 0).to_f64().abs();
    (0..rank).any(|i| r.get(i, i).to_f64().abs() <= noise * r00)
}

/// Swaps columns `a` and `b` of `R` and re-triangularizes.
fn interchange<T: Scalar>(r: &mut Matrix<T>, perm: &mut Permutation, a: usize, b: usize) {
    let mut cols: Vec<usize> = (0..r.cols()).collect();
    cols.swap(a, b);
    *r = HouseholderQr::new(&r.select_columns(&cols)).r();
    perm.swap(a, b);
}

/// The `(i, j)` pair with the largest `ρᵢⱼ² > f²` at block size `rank`, if any.
fn worst_violation<T: Scalar>(r: &Matrix<T>, rank: usize, f2: f64) -> Result<Option<(usize, usize)>> {
    let (p, n) = r.shape();
    let r = r.to_f64();
    let r11 = r.block(0..rank, 0..rank);
    let r12 = r.block(0..rank, rank..n);
    let b = upper_solve(&r11, &r12)?;
    let r11_inv = upper_solve(&r11, &Matrix::identity(rank))?;
    // 1/ωᵢ is the norm of row i of R₁₁⁻¹.
    let inv_omega: Vec<f64> = (0..rank).map(|i| norm2(&r11_inv.row(i))).collect();
    let gamma: Vec<f64> = (rank..n)
        .map(|j| if rank < p { norm2(&r.col(j)[rank..p]) } else { 0.0 })
        .collect();
    let mut best = None;
    let mut best_val = f2;
    for j in 0..n - rank {
        for i in 0..rank {
            let g = gamma[j] * inv_omega[i];
            let rho2 = b.get(i, j) * b.get(i, j) + g * g;
            if rho2 > best_val {
                best_val = rho2;
                best = Some((i, j));
            }
        }
    }
    Ok(best)
}
