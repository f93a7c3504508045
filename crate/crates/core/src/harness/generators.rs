use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::kernels::householder_qr;
use crate::matrix::Matrix;

pub(crate) fn gaussian_matrix(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Matrix<f64> {
    let mut x = Matrix::zeros(m, n);
    for v in x.as_mut_slice() {
        *v = StandardNormal.sample(rng);
    }
    x
}

/// Orthonormalized `m x n` Gaussian matrix.
pub fn random_orthonormal(m: usize, n: usize, seed: u64) -> Matrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    householder_qr(&gaussian_matrix(m, n, &mut rng)).0
}

/// `X = U Σ Vᵀ` with orthonormalized Gaussian `U` (`m x n`) and `V` (`n x n`)
/// and `Σ = diag(1, σ^{1/(n−1)}, …, σ)`, so that `cond(X) = 1/σ`.
pub fn gen_svd_matrix(m: usize, n: usize, sigma: f64, seed: u64) -> Matrix<f64> {
    assert!(sigma > 0.0 && sigma <= 1.0, "sigma must lie in (0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = householder_qr(&gaussian_matrix(m, n, &mut rng)).0;
    let v = householder_qr(&gaussian_matrix(n, n, &mut rng)).0;
    let spectrum = planted_spectrum(n, sigma);
    let mut us = u;
    for (j, &s) in spectrum.iter().enumerate() {
        for x in us.col_mut(j) {
            *x *= s;
        }
    }
    us.matmul(&v.transpose())
}

/// `σ^{i/(n−1)}` for `i = 0..n`.
pub fn planted_spectrum(n: usize, sigma: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|i| sigma.powf(i as f64 / (n - 1) as f64)).collect()
}

/// `f(x, y) = sin(10(x + y)) / (cos(100(y − x)) + 1.1)`.
pub fn grid_function(x: f64, y: f64) -> f64 {
    (10.0 * (y + x)).sin() / ((100.0 * (y - x)).cos() + 1.1)
}

/// `W(i, j) = f(xᵢ, yⱼ)` on the endpoint-inclusive uniform grid of `[0, 1]²`.
pub fn gen_grid_matrix(m: usize, n: usize) -> Matrix<f64> {
    let node = |i: usize, len: usize| if len > 1 { i as f64 / (len - 1) as f64 } else { 0.0 };
    Matrix::from_fn(m, n, |i, j| grid_function(node(i, m), node(j, n)))
}

/// `X = U V` where `U` is an orthonormalized Gaussian `m x n` matrix whose
/// first row was scaled by `sigma_scale` before orthonormalization, and `V` is
/// the upper triangle of an orthonormalized Gaussian `n x n` matrix with its
/// diagonal replaced by `[1, 10⁻¹⁵, …, 10⁻¹⁵]`.
pub fn gen_rankdef_matrix(m: usize, n: usize, sigma_scale: f64, seed: u64) -> Matrix<f64> {
    assert!(sigma_scale >= 1.0, "sigma_scale must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = gaussian_matrix(m, n, &mut rng);
    for j in 0..n {
        let v = g.get(0, j) * sigma_scale;
        g.set(0, j, v);
    }
    let u = householder_qr(&g).0;
    let w = householder_qr(&gaussian_matrix(n, n, &mut rng)).0;
    let v = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => w.get(i, j),
        std::cmp::Ordering::Equal => {
            if i == 0 {
                1.0
            } else {
                1e-15
            }
        }
        std::cmp::Ordering::Greater => 0.0,
    });
    u.matmul(&v)
}
