//! Config-driven stability sweeps with CSV output.
//!
//! A config is flat `key = value` text; `#` starts a comment. List keys (`sigma`,
//! `prefix`, `method`, `sketch`, `seed`) may be repeated or take comma-separated
//! values. Example:
//!
//! ```text
//! family = svd
//! m = 10000
//! n = 50
//! k = 100
//! sigma = 1e0, 1e-5, 1e-10, 1e-15
//! method = rcholqr
//! method = cholqr2
//! sketch = gaussian
//! seed = 1, 2, 3
//! precision = f64
//! shift = empirical   # zero, recommended or empirical
//! ```

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;

use crate::baselines::{ShiftBase, ShiftPolicy};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::precision::PrecisionPolicy;
use crate::sketch::{SketchKind, SketchOperator};

use super::generators::{gen_grid_matrix, gen_rankdef_matrix, gen_svd_matrix};
use super::methods::{run_method, sketch_seed, Method, MethodConfig};
use super::report::stability_report;

pub const CSV_HEADER: [&str; 15] = [
    "matrix_family",
    "m",
    "n",
    "k",
    "sigma_or_prefix",
    "method",
    "sketch",
    "seed",
    "precision",
    "cond_q",
    "delta_orth",
    "max_col_residual",
    "sketch_gap",
    "rank_detected",
    "status",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFamily {
    /// `gen_svd_matrix`, parameterized by `sigma`.
    Svd,
    /// Leading columns of `gen_grid_matrix(m, n)`, parameterized by `prefix`.
    Grid,
    /// `gen_rankdef_matrix`, parameterized by `sigma` (the first-row scale).
    RankDef,
}

impl MatrixFamily {
    pub fn name(self) -> &'static str {
        match self {
            MatrixFamily::Svd => "svd",
            MatrixFamily::Grid => "grid",
            MatrixFamily::RankDef => "rankdef",
        }
    }
}

impl fmt::Display for MatrixFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svd" => Ok(MatrixFamily::Svd),
            "grid" => Ok(MatrixFamily::Grid),
            "rankdef" => Ok(MatrixFamily::RankDef),
            _ => Err(Error::InvalidArgument(format!(
                "unknown matrix family `{s}` (expected svd, grid or rankdef)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub family: MatrixFamily,
    pub m: usize,
    pub n: usize,
    /// Sketch dimension; `None` means `2n`.
    pub k: Option<usize>,
    pub sigmas: Vec<f64>,
    pub prefixes: Vec<usize>,
    pub methods: Vec<Method>,
    pub sketches: Vec<SketchKind>,
    pub seeds: Vec<u64>,
    pub tau: Option<f64>,
    pub policy: PrecisionPolicy,
    pub block: usize,
    pub shift: ShiftBase,
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    /// Matrix parameter values of the family, in config order.
    fn params(&self) -> Vec<Param> {
        match self.family {
            MatrixFamily::Grid => self.prefixes.iter().map(|&p| Param::Prefix(p)).collect(),
            _ => self.sigmas.iter().map(|&s| Param::Sigma(s)).collect(),
        }
    }

    fn sketch_dim(&self) -> usize {
        self.k.unwrap_or(2 * self.n)
    }
}

impl FromStr for SweepConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut scalars: HashMap<&str, (usize, &str)> = HashMap::new();
        let mut lists: HashMap<&str, Vec<(usize, &str)>> = HashMap::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, got `{body}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "sigma" | "prefix" | "method" | "sketch" | "seed" => {
                    let entry = lists.entry(key).or_default();
                    entry.extend(value.split(',').map(str::trim).filter(|v| !v.is_empty()).map(|v| (line, v)));
                }
                "family" | "m" | "n" | "k" | "tau" | "precision" | "block" | "shift" => {
                    if let Some((prev, _)) = scalars.insert(key, (line, value)) {
                        return Err(Error::Config {
                            line,
                            message: format!("duplicate key `{key}` (first set on line {prev})"),
                        });
                    }
                }
                _ => {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }

        fn parse<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            v.parse().map_err(|e: T::Err| Error::Config {
                line,
                message: format!("bad value `{v}` for `{key}`: {e}"),
            })
        }
        let missing = |key: &str| Error::Config {
            line: last_line,
            message: format!("missing required key `{key}`"),
        };
        let scalar = |key: &str| scalars.get(key).copied();
        let list = |key: &str| lists.get(key).cloned().unwrap_or_default();

        let family: MatrixFamily = match scalar("family") {
            Some((l, v)) => parse(l, "family", v)?,
            None => return Err(missing("family")),
        };
        let m: usize = scalar("m").map(|(l, v)| parse(l, "m", v)).ok_or_else(|| missing("m"))??;
        let n: usize = scalar("n").map(|(l, v)| parse(l, "n", v)).ok_or_else(|| missing("n"))??;
        if m < n || n == 0 {
            let (line, _) = scalar("n").expect("n present");
            return Err(Error::Config {
                line,
                message: format!("need m >= n >= 1, got m = {m}, n = {n}"),
            });
        }
        let k = scalar("k").map(|(l, v)| parse::<usize>(l, "k", v)).transpose()?;
        let tau = scalar("tau").map(|(l, v)| parse::<f64>(l, "tau", v)).transpose()?;
        let policy = match scalar("precision") {
            Some((l, v)) => parse(l, "precision", v)?,
            None => PrecisionPolicy::F64,
        };
        let block = match scalar("block") {
            Some((l, v)) => parse::<usize>(l, "block", v)?,
            None => 1,
        };

        let shift = match scalar("shift") {
            Some((l, v)) => parse(l, "shift", v)?,
            None => ShiftPolicy::default().base,
        };

        let sigmas = list("sigma")
            .into_iter()
            .map(|(l, v)| {
                let s: f64 = parse(l, "sigma", v)?;
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::Config {
                        line: l,
                        message: format!("sigma must be positive and finite, got {v}"),
                    });
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        let prefixes = list("prefix")
            .into_iter()
            .map(|(l, v)| {
                let p: usize = parse(l, "prefix", v)?;
                if p == 0 || p > n {
                    return Err(Error::Config {
                        line: l,
                        message: format!("prefix must lie in 1..={n}, got {p}"),
                    });
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        let methods = list("method")
            .into_iter()
            .map(|(l, v)| parse(l, "method", v))
            .collect::<Result<Vec<Method>>>()?;
        let mut sketches = list("sketch")
            .into_iter()
            .map(|(l, v)| parse(l, "sketch", v))
            .collect::<Result<Vec<SketchKind>>>()?;
        if sketches.is_empty() {
            sketches.push(SketchKind::Gaussian);
        }
        let mut seeds = list("seed")
            .into_iter()
            .map(|(l, v)| parse(l, "seed", v))
            .collect::<Result<Vec<u64>>>()?;
        if seeds.is_empty() {
            seeds.push(0);
        }
        Ok(SweepConfig {
            family,
            m,
            n,
            k,
            sigmas,
            prefixes,
            methods,
            sketches,
            seeds,
            tau,
            policy,
            block,
            shift,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Param {
    Sigma(f64),
    Prefix(usize),
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Sigma(s) => write!(f, "{s:e}"),
            Param::Prefix(p) => write!(f, "{p}"),
        }
    }
}

/// One CSV row. Metrics are `None` for failed runs.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub family: MatrixFamily,
    pub m: usize,
    pub n: usize,
    pub k: Option<usize>,
    pub param: Param,
    pub method: Method,
    pub sketch: Option<SketchKind>,
    pub seed: u64,
    pub precision: &'static str,
    pub cond_q: Option<f64>,
    pub delta_orth: Option<f64>,
    pub max_col_residual: Option<f64>,
    pub sketch_gap: Option<f64>,
    pub rank_detected: Option<usize>,
    pub ok: bool,
}

impl SweepRow {
    fn record(&self) -> [String; 15] {
        let f = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
        [
            self.family.to_string(),
            self.m.to_string(),
            self.n.to_string(),
            self.k.map(|k| k.to_string()).unwrap_or_default(),
            self.param.to_string(),
            self.method.to_string(),
            self.sketch.map(|s| s.name().to_string()).unwrap_or_default(),
            self.seed.to_string(),
            self.precision.to_string(),
            f(self.cond_q),
            f(self.delta_orth),
            f(self.max_col_residual),
            f(self.sketch_gap),
            self.rank_detected.map(|r| r.to_string()).unwrap_or_default(),
            if self.ok { "ok" } else { "failed" }.to_string(),
        ]
    }
}

fn generate(cfg: &SweepConfig, param: Param, seed: u64, grid: Option<&Matrix<f64>>) -> Matrix<f64> {
    match (cfg.family, param) {
        (MatrixFamily::Svd, Param::Sigma(s)) => gen_svd_matrix(cfg.m, cfg.n, s, seed),
        (MatrixFamily::RankDef, Param::Sigma(s)) => gen_rankdef_matrix(cfg.m, cfg.n, s, seed),
        (MatrixFamily::Grid, Param::Prefix(p)) => grid.expect("grid generated").columns(0..p),
        _ => unreachable!("parameter kind follows the family"),
    }
}

/// Runs every (matrix, method, sketch, seed) combination. Rows come out in config order:
/// matrix parameter, then seed, then method, then sketch kind. Non-sketching methods
/// get a single row with an empty `sketch` field.
pub fn run_sweep(cfg: &SweepConfig, deterministic: bool) -> Result<Vec<SweepRow>> {
    if cfg.methods.is_empty() {
        return Ok(Vec::new());
    }
    if cfg.family == MatrixFamily::Grid && cfg.prefixes.is_empty() || cfg.family != MatrixFamily::Grid && cfg.sigmas.is_empty() {
        warn!("sweep has no matrix parameters");
    }
    let grid = (cfg.family == MatrixFamily::Grid).then(|| gen_grid_matrix(cfg.m, cfg.n));
    let k = cfg.sketch_dim();
    let shared_sketches: HashMap<(SketchKind, u64), SketchOperator> = cfg
        .sketches
        .iter()
        .filter(|&&s| s != SketchKind::LeverageScore)
        .filter(|_| cfg.methods.iter().any(|m| m.uses_sketch()))
        .flat_map(|&s| cfg.seeds.iter().map(move |&seed| (s, seed)))
        .map(|(s, seed)| Ok(((s, seed), SketchOperator::build(s, k, cfg.m, sketch_seed(seed), None)?)))
        .collect::<Result<_>>()?;

    let tasks: Vec<(Param, u64)> = cfg
        .params()
        .into_iter()
        .flat_map(|p| cfg.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let run_task = |&(param, seed): &(Param, u64)| -> Vec<SweepRow> {
        let x = generate(cfg, param, seed, grid.as_ref());
        let mut rows = Vec::new();
        for &method in &cfg.methods {
            let kinds: Vec<Option<SketchKind>> = if method.uses_sketch() {
                cfg.sketches.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for sketch in kinds {
                rows.push(run_one(cfg, &x, param, seed, method, sketch, &shared_sketches));
            }
        }
        rows
    };
    let rows: Vec<Vec<SweepRow>> = if deterministic {
        tasks.iter().map(run_task).collect()
    } else {
        tasks.par_iter().map(run_task).collect()
    };
    Ok(rows.into_iter().flatten().collect())
}

fn run_one(
    cfg: &SweepConfig,
    x: &Matrix<f64>,
    param: Param,
    seed: u64,
    method: Method,
    sketch: Option<SketchKind>,
    shared: &HashMap<(SketchKind, u64), SketchOperator>,
) -> SweepRow {
    let mcfg = MethodConfig {
        sketch: sketch.unwrap_or(SketchKind::Gaussian),
        k: Some(cfg.sketch_dim()),
        seed,
        tau: cfg.tau,
        policy: cfg.policy,
        block: cfg.block,
        shift: cfg.shift,
    };
    let mut row = SweepRow {
        family: cfg.family,
        m: cfg.m,
        n: x.cols(),
        k: sketch.map(|_| cfg.sketch_dim()),
        param,
        method,
        sketch,
        seed,
        precision: cfg.policy.flag(),
        cond_q: None,
        delta_orth: None,
        max_col_residual: None,
        sketch_gap: None,
        rank_detected: None,
        ok: false,
    };
    let local;
    let theta = match sketch {
        None => None,
        Some(kind) => match shared.get(&(kind, seed)) {
            Some(t) => Some(t),
            None => match mcfg.build_sketch(x) {
                Ok(t) => {
                    local = t;
                    Some(&local)
                }
                Err(e) => {
                    warn!("{method} {param} seed {seed}: {e}");
                    return row;
                }
            },
        },
    };
    match run_method(method, x, theta, &mcfg) {
        Ok(f) => {
            let r = stability_report(x, &f, theta, method.name(), Some(seed), cfg.policy.flag());
            row.ok = r.is_finite();
            row.cond_q = Some(r.cond_q);
            row.delta_orth = Some(r.delta_orth);
            row.max_col_residual = Some(r.max_col_residual);
            row.sketch_gap = r.sketch_gap;
            row.rank_detected = r.rank_detected;
        }
        Err(e) => warn!("{method} {param} seed {seed}: {e}"),
    }
    row
}

/// Writes the header and the rows.
pub fn write_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    out.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in rows {
        out.write_record(row.record()).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}
