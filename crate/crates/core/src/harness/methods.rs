use std::fmt;
use std::str::FromStr;

use crate::baselines::{choleskyqr, choleskyqr2, shifted_choleskyqr2, shifted_choleskyqr3, ShiftBase, ShiftPolicy};
use crate::error::{Error, Result};
use crate::kernels::householder_qr;
use crate::matrix::{Matrix, Scalar};
use crate::precision::PrecisionPolicy;
use crate::rcholqr::{col_rcholeskyqr, rcholeskyqr, rcholeskyqr2, BlockSource, QRFactors};
use crate::rrrcholqr::{default_tau, rrrcholeskyqr, rrrcholeskyqr2, RRQRFactors};
use crate::sketch::{SketchKind, SketchOperator};
use crate::with_precision;

use super::report::Factorization;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    CholQr,
    CholQr2,
    SCholQr2,
    SCholQr3,
    RCholQr,
    RCholQr2,
    RrrCholQr,
    RrrCholQr2,
    ColRCholQr,
    Rgs,
    Householder,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::CholQr,
        Method::CholQr2,
        Method::SCholQr2,
        Method::SCholQr3,
        Method::RCholQr,
        Method::RCholQr2,
        Method::RrrCholQr,
        Method::RrrCholQr2,
        Method::ColRCholQr,
        Method::Rgs,
        Method::Householder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::CholQr => "cholqr",
            Method::CholQr2 => "cholqr2",
            Method::SCholQr2 => "scholqr2",
            Method::SCholQr3 => "scholqr3",
            Method::RCholQr => "rcholqr",
            Method::RCholQr2 => "rcholqr2",
            Method::RrrCholQr => "rrrcholqr",
            Method::RrrCholQr2 => "rrrcholqr2",
            Method::ColRCholQr => "col-rcholqr",
            Method::Rgs => "rgs",
            Method::Householder => "hh",
        }
    }

    pub fn uses_sketch(self) -> bool {
        matches!(
            self,
            Method::RCholQr | Method::RCholQr2 | Method::RrrCholQr | Method::RrrCholQr2 | Method::ColRCholQr | Method::Rgs
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::InvalidArgument(format!("unknown method `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Parameters shared by all methods.
#[derive(Clone, Debug)]
pub struct MethodConfig {
    pub sketch: SketchKind,
    /// Sketch dimension; `None` means `2n`.
    pub k: Option<usize>,
    pub seed: u64,
    /// Truncation tolerance; `None` means the policy default.
    pub tau: Option<f64>,
    pub policy: PrecisionPolicy,
    /// Column block width of the column-oriented methods.
    pub block: usize,
    /// First-stage shift of the shifted Cholesky QR baselines.
    pub shift: ShiftBase,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            sketch: SketchKind::Gaussian,
            k: None,
            seed: 0,
            tau: None,
            policy: PrecisionPolicy::F64,
            block: 1,
            shift: ShiftPolicy::default().base,
        }
    }
}

impl MethodConfig {
    pub fn sketch_dim(&self, n: usize) -> usize {
        self.k.unwrap_or(2 * n)
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or_else(|| default_tau(&self.policy))
    }

    /// Builds the sketch for an `m x n` input. Leverage sampling reads `x`.
    pub fn build_sketch(&self, x: &Matrix<f64>) -> Result<SketchOperator> {
        let (m, n) = x.shape();
        SketchOperator::build(self.sketch, self.sketch_dim(n), m, sketch_seed(self.seed), Some(x))
    }
}

/// Seed of the sketch drawn for data seed `seed`; decorrelates the sketch from
/// generators keyed by the same integer.
pub fn sketch_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03
}

fn from_qr<T: Scalar>(f: QRFactors<T>) -> Result<Factorization> {
    let q = f.q()?.to_f64();
    Ok(Factorization {
        q,
        r: f.r.to_f64(),
        s: f.s,
        perm: None,
        rank: None,
    })
}

fn from_rrqr<T: Scalar>(f: RRQRFactors<T>) -> Result<Factorization> {
    let q = f.q()?.to_f64();
    Ok(Factorization {
        q,
        r: f.r.to_f64(),
        s: Some(f.s),
        perm: Some(f.perm),
        rank: Some(f.rank),
    })
}

fn run_typed<T: Scalar>(
    method: Method,
    x: &Matrix<T>,
    theta: Option<&SketchOperator>,
    cfg: &MethodConfig,
) -> Result<Factorization> {
    let pol = &cfg.policy;
    let shift = ShiftPolicy {
        base: cfg.shift,
        escalation: true,
    };
    let theta = || theta.ok_or_else(|| Error::InvalidArgument(format!("{method} needs a sketch")));
    match method {
        Method::CholQr => from_qr(choleskyqr(x, pol)?),
        Method::CholQr2 => from_qr(choleskyqr2(x, pol)?),
        Method::SCholQr2 => from_qr(shifted_choleskyqr2(x, &shift, pol)?),
        Method::SCholQr3 => from_qr(shifted_choleskyqr3(x, &shift, pol)?),
        Method::RCholQr => from_qr(rcholeskyqr(x, theta()?, pol)?),
        Method::RCholQr2 => from_qr(rcholeskyqr2(x, theta()?, pol, false)?),
        Method::RrrCholQr => from_rrqr(rrrcholeskyqr(x, theta()?, cfg.tau(), pol)?),
        Method::RrrCholQr2 => from_rrqr(rrrcholeskyqr2(x, theta()?, cfg.tau(), pol, false)?),
        Method::ColRCholQr | Method::Rgs => {
            let blocks = x.cols().div_ceil(cfg.block.max(1));
            let src = BlockSource::from_matrix(x, blocks);
            from_qr(col_rcholeskyqr(src, theta()?, pol, method == Method::Rgs)?)
        }
        Method::Householder => {
            let (q, r) = householder_qr(x);
            Ok(Factorization::new(&q, &r))
        }
    }
}

/// Runs `method` on `x` (given in binary64 and rounded to the working precision).
pub fn run_method(
    method: Method,
    x: &Matrix<f64>,
    theta: Option<&SketchOperator>,
    cfg: &MethodConfig,
) -> Result<Factorization> {
    with_precision!(cfg.policy.working(), T => run_typed(method, &x.cast::<T>(), theta, cfg))
}
