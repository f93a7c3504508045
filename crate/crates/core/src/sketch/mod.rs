//! Sketching operators `Θ: ℝᵐ → ℝᵏ` and subspace-embedding utilities.
//!
//! Three families are provided: rescaled Gaussian matrices, the subsampled
//! randomized Hadamard transform (SRHT), and leverage-score row sampling. An
//! explicit dense operator is also available for tests and for extractors.
//! Identical `(kind, k, m, seed)` always produce a bit-identical operator.

mod embedding;
mod hadamard;
mod ose;

pub use embedding::{verify_embedding, EmbeddingReport};
pub use hadamard::fwht;
pub use ose::{ose_dim, DEFAULT_DELTA, DEFAULT_EPSILON};

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, WeightedIndex};

use crate::error::{Error, Result};
use crate::kernels::householder_qr;
use crate::matrix::{axpy, dot, Matrix, Scalar};
use crate::precision::{Op, PrecisionPolicy};
use crate::with_precision;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SketchKind {
    Gaussian,
    Srht,
    LeverageScore,
    /// A user-supplied dense matrix.
    Explicit,
}

impl SketchKind {
    pub fn name(self) -> &'static str {
        match self {
            SketchKind::Gaussian => "gaussian",
            SketchKind::Srht => "srht",
            SketchKind::LeverageScore => "leverage",
            SketchKind::Explicit => "explicit",
        }
    }
}

impl fmt::Display for SketchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SketchKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(SketchKind::Gaussian),
            "srht" => Ok(SketchKind::Srht),
            "leverage" => Ok(SketchKind::LeverageScore),
            other => Err(Error::InvalidArgument(format!(
                "unknown sketch `{other}` (expected gaussian, srht or leverage)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
enum Payload {
    Dense(Matrix<f64>),
    Srht {
        m_pad: usize,
        signs: Vec<bool>,
        rows: Vec<usize>,
    },
    Sampling {
        probs: Vec<f64>,
        rows: Vec<usize>,
        scales: Vec<f64>,
    },
}

#[derive(Clone, Debug)]
pub struct SketchOperator {
    kind: SketchKind,
    k: usize,
    m: usize,
    seed: u64,
    payload: Payload,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl SketchOperator {
    /// Rescaled Gaussian operator with i.i.d. `N(0, 1/k)` entries. Column `j`
    /// is drawn from the ChaCha stream `j` keyed by `seed`, so any column can be
    /// regenerated on its own.
    pub fn gaussian(k: usize, m: usize, seed: u64) -> Self {
        let scale = 1.0 / (k as f64).sqrt();
        let mut dense = Matrix::<f64>::zeros(k, m);
        for j in 0..m {
            let mut rng = stream_rng(seed, j as u64);
            for v in dense.col_mut(j) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v = z * scale;
            }
        }
        Self {
            kind: SketchKind::Gaussian,
            k,
            m,
            seed,
            payload: Payload::Dense(dense),
        }
    }

    /// `Θ = √(m_pad/k) · Sample_k · H_norm · D_sign · Pad`.
    pub fn srht(k: usize, m: usize, seed: u64) -> Result<Self> {
        let m_pad = m.max(1).next_power_of_two();
        if k == 0 || k > m_pad {
            return Err(Error::InvalidArgument(format!(
                "SRHT needs 1 <= k <= {m_pad}, got k = {k}"
            )));
        }
        let mut sign_rng = stream_rng(seed, 0);
        let signs: Vec<bool> = (0..m).map(|_| sign_rng.gen::<bool>()).collect();
        let mut row_rng = stream_rng(seed, 1);
        let mut rows = index::sample(&mut row_rng, m_pad, k).into_vec();
        rows.sort_unstable();
        Ok(Self {
            kind: SketchKind::Srht,
            k,
            m,
            seed,
            payload: Payload::Srht { m_pad, signs, rows },
        })
    }

    /// Row sampling with replacement according to `q`, row `i` scaled by `1/√(k qᵢ)`.
    pub fn leverage(k: usize, q: &[f64], seed: u64) -> Result<Self> {
        let total: f64 = q.iter().sum();
        if q.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) || !(total > 0.0) {
            return Err(Error::InvalidArgument(
                "sampling probabilities must be nonnegative with positive sum".into(),
            ));
        }
        let dist = WeightedIndex::new(q).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut rng = stream_rng(seed, 0);
        let rows: Vec<usize> = (0..k).map(|_| dist.sample(&mut rng)).collect();
        let scales = rows
            .iter()
            .map(|&i| 1.0 / (k as f64 * q[i] / total).sqrt())
            .collect();
        Ok(Self {
            kind: SketchKind::LeverageScore,
            k,
            m: q.len(),
            seed,
            payload: Payload::Sampling {
                probs: q.iter().map(|&p| p / total).collect(),
                rows,
                scales,
            },
        })
    }

    /// Wraps an explicit `k x m` matrix.
    pub fn from_dense(theta: Matrix<f64>) -> Self {
        Self {
            kind: SketchKind::Explicit,
            k: theta.rows(),
            m: theta.cols(),
            seed: 0,
            payload: Payload::Dense(theta),
        }
    }

    pub fn identity(m: usize) -> Self {
        Self::from_dense(Matrix::identity(m))
    }

    /// Builds an operator of the given kind. Leverage sampling needs the
    /// matrix whose range is embedded, so it is built from `v`.
    pub fn build(kind: SketchKind, k: usize, m: usize, seed: u64, v: Option<&Matrix<f64>>) -> Result<Self> {
        match kind {
            SketchKind::Gaussian => Ok(Self::gaussian(k, m, seed)),
            SketchKind::Srht => Self::srht(k, m, seed),
            SketchKind::LeverageScore => {
                let v = v.ok_or_else(|| {
                    Error::InvalidArgument("leverage-score sketch needs the input matrix".into())
                })?;
                let q = compute_leverage_scores(v)?;
                Self::leverage(k, &q, seed)
            }
            SketchKind::Explicit => Err(Error::InvalidArgument(
                "explicit sketches are built with SketchOperator::from_dense".into(),
            )),
        }
    }

    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Padded length for SRHT operators.
    pub fn m_pad(&self) -> Option<usize> {
        match &self.payload {
            Payload::Srht { m_pad, .. } => Some(*m_pad),
            _ => None,
        }
    }

    pub fn sampling_probabilities(&self) -> Option<&[f64]> {
        match &self.payload {
            Payload::Sampling { probs, .. } => Some(probs),
            _ => None,
        }
    }

    pub fn sampled_rows(&self) -> Option<&[usize]> {
        match &self.payload {
            Payload::Srht { rows, .. } | Payload::Sampling { rows, .. } => Some(rows),
            Payload::Dense(_) => None,
        }
    }

    /// `ΘX` evaluated entirely in the arithmetic of `T`.
    pub fn apply<T: Scalar>(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.rows() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "sketch expects {} rows, got {}",
                self.m,
                x.rows()
            )));
        }
        let n = x.cols();
        let mut out = Matrix::<T>::zeros(self.k, n);
        match &self.payload {
            Payload::Dense(theta) => {
                let theta_t: Matrix<T> = theta.cast();
                for c in 0..n {
                    let xc = x.col(c);
                    let oc = out.col_mut(c);
                    for (i, &xi) in xc.iter().enumerate() {
                        if xi != T::ZERO {
                            axpy(xi, theta_t.col(i), oc);
                        }
                    }
                }
            }
            Payload::Srht { m_pad, signs, rows } => {
                // Unnormalized butterflies, then a single scaling by 1/√k
                // (√(m_pad/k) times the 1/√m_pad of the orthonormal transform).
                let scale = T::ONE / T::from_f64(self.k as f64).sqrt();
                let mut buf = vec![T::ZERO; *m_pad];
                for c in 0..n {
                    buf.iter_mut().for_each(|b| *b = T::ZERO);
                    for (i, (&xi, &neg)) in x.col(c).iter().zip(signs).enumerate() {
                        buf[i] = if neg { -xi } else { xi };
                    }
                    hadamard::fwht_unnormalized(&mut buf);
                    for (o, &r) in out.col_mut(c).iter_mut().zip(rows) {
                        *o = buf[r] * scale;
                    }
                }
            }
            Payload::Sampling { rows, scales, .. } => {
                for c in 0..n {
                    let xc = x.col(c);
                    for (o, (&r, &s)) in out.col_mut(c).iter_mut().zip(rows.iter().zip(scales)) {
                        *o = xc[r] * T::from_f64(s);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `ΘX` accumulated in the policy's precision for sketch application and
    /// rounded once to `T`.
    pub fn apply_with_policy<T: Scalar>(&self, x: &Matrix<T>, policy: &PrecisionPolicy) -> Result<Matrix<T>> {
        with_precision!(policy.precision_for(Op::ApplySketch), U => {
            if U::PRECISION == T::PRECISION {
                self.apply(x)
            } else {
                Ok(self.apply(&x.cast::<U>())?.cast::<T>())
            }
        })
    }

    /// Explicit `k x m` matrix, built independently of the fast application path.
    pub fn to_dense(&self) -> Matrix<f64> {
        match &self.payload {
            Payload::Dense(theta) => theta.clone(),
            Payload::Srht { signs, rows, .. } => {
                let scale = 1.0 / (self.k as f64).sqrt();
                Matrix::from_fn(self.k, self.m, |l, i| {
                    let h = if (rows[l] & i).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    let s = if signs[i] { -1.0 } else { 1.0 };
                    h * s * scale
                })
            }
            Payload::Sampling { rows, scales, .. } => {
                let mut d = Matrix::zeros(self.k, self.m);
                for (l, (&r, &s)) in rows.iter().zip(scales).enumerate() {
                    d.set(l, r, s);
                }
                d
            }
        }
    }

    /// `ΘX` via the explicit matrix, for SRHT keeping the ±1 pattern exact and
    /// scaling once at the end. Test oracle for [`SketchOperator::apply`].
    pub fn apply_dense(&self, x: &Matrix<f64>) -> Matrix<f64> {
        match &self.payload {
            Payload::Srht { signs, rows, .. } => {
                let scale = 1.0 / (self.k as f64).sqrt();
                Matrix::from_fn(self.k, x.cols(), |l, c| {
                    let pattern: Vec<f64> = (0..self.m)
                        .map(|i| {
                            let h = if (rows[l] & i).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                            if signs[i] {
                                -h
                            } else {
                                h
                            }
                        })
                        .collect();
                    dot(&pattern, x.col(c)) * scale
                })
            }
            _ => self.to_dense().matmul(x),
        }
    }
}

/// Normalized leverage scores `qᵢ = ‖W(i,:)‖²/d` of an orthonormal basis `W`
/// of `range(V)`, renormalized to sum to one.
pub fn compute_leverage_scores<T: Scalar>(v: &Matrix<T>) -> Result<Vec<f64>> {
    let v = v.to_f64();
    let (m, d) = v.shape();
    if d == 0 || m < d {
        return Err(Error::RankDeficient);
    }
    let (w, r) = householder_qr(&v);
    let r00 = r.get(0, 0).abs();
    let tol = 10.0 * (m as f64) * f64::EPSILON * r00;
    if r.diag().iter().any(|&x| x.abs() <= tol) {
        return Err(Error::RankDeficient);
    }
    let mut q: Vec<f64> = (0..m)
        .map(|i| {
            let row = w.row(i);
            dot(&row, &row) / d as f64
        })
        .collect();
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= total);
    Ok(q)
}
