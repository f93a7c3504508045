use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::{cond, householder_qr, least_squares};
use crate::matrix::{norm2, Matrix};
use crate::precision::PrecisionPolicy;
use crate::rcholqr::ColumnRcholQr;
use crate::sketch::SketchOperator;

use super::generators::gaussian_matrix;

/// Orthogonalization used to build the block Krylov basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrthMethod {
    /// Block classical Gram–Schmidt applied twice with Householder QR of each block.
    Reference,
    ColRcholQr,
    /// Column-oriented RCholeskyQR with the sketch of each `Q` block recomputed.
    Rgs,
}

impl OrthMethod {
    pub fn name(self) -> &'static str {
        match self {
            OrthMethod::Reference => "bcgs2",
            OrthMethod::ColRcholQr => "col-rcholqr",
            OrthMethod::Rgs => "rgs",
        }
    }
}

impl fmt::Display for OrthMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrthMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bcgs2" | "reference" => Ok(OrthMethod::Reference),
            "col-rcholqr" => Ok(OrthMethod::ColRcholQr),
            "rgs" => Ok(OrthMethod::Rgs),
            _ => Err(Error::InvalidArgument(format!(
                "unknown orthogonalization `{s}` (expected bcgs2, col-rcholqr or rgs)"
            ))),
        }
    }
}

pub type Operator<'a> = dyn Fn(&Matrix<f64>) -> Matrix<f64> + 'a;

pub struct GmresConfig<'a> {
    pub operator: &'a Operator<'a>,
    pub rhs: Matrix<f64>,
    /// Block iterations per cycle.
    pub restart: usize,
    pub orth: OrthMethod,
    /// Sketch dimension; must be at least `restart · s`.
    pub k: usize,
    pub seed: u64,
    /// Target for the largest column-wise relative residual.
    pub tol: f64,
    pub max_cycles: usize,
}

impl<'a> GmresConfig<'a> {
    /// Defaults: restart 30, `k = 2 · restart · s`, tolerance 1e-10, 20 cycles, RGS.
    pub fn new(operator: &'a Operator<'a>, rhs: Matrix<f64>) -> Self {
        let s = rhs.cols();
        Self {
            operator,
            rhs,
            restart: 30,
            orth: OrthMethod::Rgs,
            k: 60 * s,
            seed: 0,
            tol: 1e-10,
            max_cycles: 20,
        }
    }

    pub fn block_width(&self) -> usize {
        self.rhs.cols()
    }
}

#[derive(Debug)]
pub struct GmresOutput {
    pub solution: Matrix<f64>,
    /// Largest column-wise relative residual after every iteration.
    pub residual_history: Vec<f64>,
    /// `cond(Q₍₁:ᵢ₎)` after every basis extension.
    pub cond_history: Vec<f64>,
    /// Iterations at which a cycle ended.
    pub cycle_ends: Vec<usize>,
    pub converged: bool,
    /// Set when a diagonal `R` block became singular; the histories are partial.
    pub breakdown: Option<Error>,
}

impl GmresOutput {
    pub fn iterations(&self) -> usize {
        self.residual_history.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }
}

enum Basis<'a> {
    Reference(Matrix<f64>),
    Sketched(ColumnRcholQr<'a, f64>),
}

impl Basis<'_> {
    fn q(&self) -> &Matrix<f64> {
        match self {
            Basis::Reference(q) => q,
            Basis::Sketched(qr) => qr.q(),
        }
    }

    fn push(&mut self, x: &Matrix<f64>) -> Result<()> {
        match self {
            Basis::Reference(q) => {
                let mut w = x.clone();
                for _ in 0..2 {
                    if q.cols() > 0 {
                        w = w.sub(&q.matmul(&q.tr_matmul(&w)));
                    }
                }
                let (qi, r) = householder_qr(&w);
                let scale = norm2(x.as_slice()).max(f64::MIN_POSITIVE);
                if let Some(j) = r.diag().iter().position(|d| d.abs() <= scale * 1e-15) {
                    return Err(Error::SingularTriangular { index: q.cols() + j });
                }
                *q = q.hcat(&qi);
                Ok(())
            }
            Basis::Sketched(qr) => qr.push_block(x).map(|_| ()),
        }
    }
}

fn max_rel_residual(r: &Matrix<f64>, b_norms: &[f64]) -> f64 {
    (0..r.cols())
        .map(|j| {
            let n = norm2(r.col(j));
            if b_norms[j] > 0.0 {
                n / b_norms[j]
            } else {
                n
            }
        })
        .fold(0.0, f64::max)
}

/// Restarted block GMRES for `A U = B` starting from `U = 0`.
///
/// Each cycle builds the block Krylov basis `Q₍₁₎ = orth(R₀)`, `Q₍ᵢ₊₁₎ = orth(A Q₍ᵢ₎)` and
/// takes the update `Q₍₁:ᵢ₎ Y` minimizing `‖R₀ − A Q₍₁:ᵢ₎ Y‖`: exactly for the reference
/// orthogonalization, in the sketched norm `‖Θ(·)‖` otherwise.
pub fn block_gmres(cfg: &GmresConfig<'_>) -> Result<GmresOutput> {
    let (m, s) = cfg.rhs.shape();
    if cfg.restart == 0 {
        return Err(Error::InvalidArgument("restart must be at least 1".into()));
    }
    if s == 0 {
        return Err(Error::InvalidArgument("right-hand side has no columns".into()));
    }
    let sketched = cfg.orth != OrthMethod::Reference;
    if sketched && cfg.k < cfg.restart * s {
        return Err(Error::InvalidArgument(format!(
            "sketch dimension {} is smaller than the basis width {} at restart",
            cfg.k,
            cfg.restart * s
        )));
    }
    let theta = if sketched {
        Some(SketchOperator::gaussian(cfg.k, m, cfg.seed))
    } else {
        None
    };
    let b_norms: Vec<f64> = (0..s).map(|j| norm2(cfg.rhs.col(j))).collect();
    let mut out = GmresOutput {
        solution: Matrix::zeros(m, s),
        residual_history: Vec::new(),
        cond_history: Vec::new(),
        cycle_ends: Vec::new(),
        converged: false,
        breakdown: None,
    };

    for _ in 0..cfg.max_cycles {
        let r0 = cfg.rhs.sub(&(cfg.operator)(&out.solution));
        if max_rel_residual(&r0, &b_norms) <= cfg.tol {
            out.converged = true;
            break;
        }
        let mut basis = match &theta {
            None => Basis::Reference(Matrix::zeros(m, 0)),
            Some(t) => Basis::Sketched(ColumnRcholQr::new(t, PrecisionPolicy::F64, cfg.orth == OrthMethod::Rgs)?),
        };
        if let Err(e) = basis.push(&r0) {
            out.breakdown = Some(breakdown(e, out.iterations()));
            return Ok(out);
        }
        out.cond_history.push(cond(basis.q())?);
        let theta_r0 = theta.as_ref().map(|t| t.apply(&r0)).transpose()?;
        let mut aq = Matrix::zeros(m, 0);
        let mut theta_aq = Matrix::zeros(cfg.k, 0);
        let mut update = None;

        for i in 0..cfg.restart {
            let qi = basis.q().columns(i * s..(i + 1) * s);
            let w = (cfg.operator)(&qi);
            aq = aq.hcat(&w);
            let y = match (&theta, &theta_r0) {
                (Some(t), Some(tr0)) => {
                    theta_aq = theta_aq.hcat(&t.apply(&w)?);
                    least_squares(&theta_aq, tr0)
                }
                _ => least_squares(&aq, &r0),
            };
            let y = match y {
                Ok(y) => y,
                Err(e) => {
                    out.breakdown = Some(breakdown(e, out.iterations()));
                    return Ok(out);
                }
            };
            let res = r0.sub(&aq.matmul(&y));
            let rel = max_rel_residual(&res, &b_norms);
            out.residual_history.push(rel);
            update = Some((i + 1, y));
            if rel <= cfg.tol || i + 1 == cfg.restart {
                break;
            }
            if let Err(e) = basis.push(&w) {
                out.breakdown = Some(breakdown(e, out.iterations()));
                let (j, y) = update.take().expect("update set above");
                out.solution = out.solution.add(&basis.q().columns(0..j * s).matmul(&y));
                return Ok(out);
            }
            out.cond_history.push(cond(basis.q())?);
        }
        if let Some((j, y)) = update {
            out.solution = out.solution.add(&basis.q().columns(0..j * s).matmul(&y));
        }
        out.cycle_ends.push(out.iterations());
        if out.final_residual() <= cfg.tol {
            out.converged = true;
            break;
        }
    }
    Ok(out)
}

fn breakdown(e: Error, iteration: usize) -> Error {
    match e {
        Error::SingularTriangular { .. } | Error::RankDeficient => Error::Breakdown { iteration },
        other => other,
    }
}

/// Five-point Laplacian on an `n × n` grid with Dirichlet boundary, plus `shift · I`.
#[derive(Clone, Copy, Debug)]
pub struct ShiftedLaplacian {
    pub n: usize,
    pub shift: f64,
}

impl ShiftedLaplacian {
    pub fn new(n: usize, shift: f64) -> Self {
        Self { n, shift }
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn apply(&self, x: &Matrix<f64>) -> Matrix<f64> {
        let n = self.n;
        assert_eq!(x.rows(), n * n, "operand has the wrong number of rows");
        let mut y = Matrix::zeros(x.rows(), x.cols());
        for c in 0..x.cols() {
            let (src, dst) = (x.col(c), y.col_mut(c));
            for j in 0..n {
                for i in 0..n {
                    let p = i + j * n;
                    let mut v = (4.0 + self.shift) * src[p];
                    if i > 0 {
                        v -= src[p - 1];
                    }
                    if i + 1 < n {
                        v -= src[p + 1];
                    }
                    if j > 0 {
                        v -= src[p - n];
                    }
                    if j + 1 < n {
                        v -= src[p + n];
                    }
                    dst[p] = v;
                }
            }
        }
        y
    }
}

/// Standard Gaussian right-hand side block.
pub fn seeded_rhs(m: usize, s: usize, seed: u64) -> Matrix<f64> {
    gaussian_matrix(m, s, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_converges_in_one_iteration() {
        let op = |x: &Matrix<f64>| x.clone();
        for orth in [OrthMethod::Reference, OrthMethod::ColRcholQr, OrthMethod::Rgs] {
            let mut cfg = GmresConfig::new(&op, seeded_rhs(100, 3, 1));
            cfg.orth = orth;
            cfg.k = 20;
            cfg.restart = 5;
            let out = block_gmres(&cfg).unwrap();
            assert_eq!(out.iterations(), 1, "{orth}");
            assert!(out.final_residual() <= 1e-14, "{orth}: {}", out.final_residual());
            assert!(out.converged && out.breakdown.is_none());
            assert!(cfg.rhs.sub(&out.solution).max_abs() <= 1e-13);
        }
    }

    #[test]
    fn diagonal_operator_with_rgs() {
        let d: Vec<f64> = (1..=200).map(f64::from).collect();
        let op = |x: &Matrix<f64>| Matrix::from_fn(x.rows(), x.cols(), |i, j| d[i] * x.get(i, j));
        let mut cfg = GmresConfig::new(&op, seeded_rhs(200, 2, 5));
        cfg.k = 120;
        cfg.tol = 1e-9;
        let out = block_gmres(&cfg).unwrap();
        assert!(out.breakdown.is_none());
        assert!(out.final_residual() <= 1e-8, "{}", out.final_residual());
        let ends: Vec<f64> = out.cycle_ends.iter().map(|&i| out.residual_history[i - 1]).collect();
        assert!(ends.windows(2).all(|w| w[1] < w[0]), "{ends:?}");
        let r = cfg.rhs.sub(&op(&out.solution));
        assert!(max_rel_residual(&r, &[norm2(cfg.rhs.col(0)), norm2(cfg.rhs.col(1))]) <= 1e-8);
    }

    #[test]
    fn reference_is_monotone_on_spd() {
        let lap = ShiftedLaplacian::new(12, 0.2);
        let op = |x: &Matrix<f64>| lap.apply(x);
        let mut cfg = GmresConfig::new(&op, seeded_rhs(lap.dim(), 2, 9));
        cfg.orth = OrthMethod::Reference;
        cfg.restart = 5;
        let out = block_gmres(&cfg).unwrap();
        assert!(out.converged);
        let mut start = 0;
        for &end in &out.cycle_ends {
            let cyc = &out.residual_history[start..end];
            assert!(cyc.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{cyc:?}");
            start = end;
        }
    }

    #[test]
    fn laplacian_rgs_basis_stays_conditioned() {
        let lap = ShiftedLaplacian::new(32, 0.2);
        let op = |x: &Matrix<f64>| lap.apply(x);
        let mut cfg = GmresConfig::new(&op, seeded_rhs(lap.dim(), 4, 2));
        cfg.k = 240;
        cfg.seed = 3;
        let out = block_gmres(&cfg).unwrap();
        assert!(out.breakdown.is_none());
        assert!(out.cond_history.iter().all(|&c| c <= 10.0), "{:?}", out.cond_history);
        assert!(out.final_residual() <= 1e-8);
    }

    #[test]
    fn laplacian_matches_dense_stencil() {
        let lap = ShiftedLaplacian::new(3, 0.5);
        let e = Matrix::<f64>::identity(9);
        let a = lap.apply(&e);
        assert_eq!(a.get(4, 4), 4.5);
        assert_eq!(a.get(3, 4), -1.0);
        assert_eq!(a.get(1, 4), -1.0);
        assert_eq!(a.get(2, 3), 0.0);
        assert_eq!(a, a.transpose());
    }

    #[test]
    fn rejects_small_sketch() {
        let op = |x: &Matrix<f64>| x.clone();
        let mut cfg = GmresConfig::new(&op, seeded_rhs(50, 2, 1));
        cfg.k = 10;
        assert!(matches!(block_gmres(&cfg), Err(Error::InvalidArgument(_))));
    }
}
