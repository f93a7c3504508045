//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sketchqr::harness::{
    block_gmres, embed_check, gen_grid_matrix, gen_rankdef_matrix, gen_svd_matrix, random_orthonormal, run_sweep,
    seeded_rhs, write_csv, GmresConfig, Method, OrthMethod, Param, ShiftedLaplacian, SweepConfig, SweepRow,
};
use sketchqr::kernels::{col_norms, cond, singular_values, strong_rrqr, svd_small};
use sketchqr::rcholqr::{col_rcholeskyqr, rcholeskyqr, BlockSource};
use sketchqr::rrrcholqr::{rrrcholeskyqr, RRQR_F};
use sketchqr::sketch::{fwht, ose_dim, verify_embedding};
use sketchqr::{Matrix, PrecisionPolicy, SketchKind, SketchOperator};

const U64: f64 = f64::EPSILON / 2.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sigmas(lo_exp: i32) -> String {
    (0..=lo_exp).map(|e| format!("1e-{e}")).collect::<Vec<_>>().join(", ")
}

fn normalize(x: &Matrix<f64>) -> Matrix<f64> {
    let norms = col_norms(x);
    Matrix::from_fn(x.rows(), x.cols(), |i, j| x.get(i, j) / norms[j])
}

fn rows_of<'a>(rows: &'a [SweepRow], m: Method) -> impl Iterator<Item = &'a SweepRow> {
    rows.iter().filter(move |r| r.method == m)
}

fn fmt_max(v: f64) -> String {
    format!("{v:.3e}")
}

fn max_of<'a>(rows: impl Iterator<Item = &'a SweepRow>, f: impl Fn(&SweepRow) -> Option<f64>) -> f64 {
    rows.map(|r| f(r).unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
}

/// Conditioning sweep over sigma on gen_svd_matrix.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cfg: SweepConfig = format!(
        "family = svd\nm = 10000\nn = 50\nk = 100\nsigma = {}\n\
         method = rcholqr, rrrcholqr, cholqr2, rcholqr2, rrrcholqr2, scholqr3\n\
         sketch = gaussian\nseed = 1, 2, 3\nprecision = f64\n",
        sigmas(15)
    )
    .parse()
    .expect("config parses");
    let rows = run_sweep(&cfg, false).expect("sweep runs");
    let elapsed = start.elapsed();

    let a_methods = [Method::RCholQr, Method::RrrCholQr];
    let a_cond = max_of(rows.iter().filter(|r| a_methods.contains(&r.method)), |r| r.cond_q);
    let a_res = max_of(rows.iter().filter(|r| a_methods.contains(&r.method)), |r| r.max_col_residual);
    let a_ok = rows.iter().filter(|r| a_methods.contains(&r.method)).all(|r| r.ok)
        && a_cond <= 4.0
        && a_res <= 1e-12;

    let b_rows: Vec<&SweepRow> = rows_of(&rows, Method::CholQr2)
        .filter(|r| matches!(r.param, Param::Sigma(s) if s <= 1e-10))
        .collect();
    let b_ok = !b_rows.is_empty() && b_rows.iter().all(|r| !r.ok || r.delta_orth.unwrap() > 1e-4);

    let c_methods = [Method::RCholQr2, Method::RrrCholQr2, Method::SCholQr3];
    let c_delta = max_of(rows.iter().filter(|r| c_methods.contains(&r.method)), |r| r.delta_orth);
    let c_ok = rows.iter().filter(|r| c_methods.contains(&r.method)).all(|r| r.ok) && c_delta <= 1e-12;

    let t_ok = elapsed <= Duration::from_secs(120);
    outcome(
        a_ok && b_ok && c_ok && t_ok && rows.len() == 16 * 3 * 6,
        format!(
            "{} rows; (a) max cond(Q) {} (<= 4), max residual {} (<= 1e-12): {}; \
             (b) cholqr2 failed or delta > 1e-4 for sigma <= 1e-10: {}; \
             (c) max delta_orth {} (<= 1e-12): {}; runtime {:.1}s (<= 120s)",
            rows.len(),
            fmt_max(a_cond),
            fmt_max(a_res),
            a_ok,
            b_ok,
            fmt_max(c_delta),
            c_ok,
            elapsed.as_secs_f64()
        ),
    )
}

/// Numerical rank at a threshold relative to the largest singular value.
fn numerical_rank(x: &Matrix<f64>, rel: f64) -> usize {
    let s = singular_values(x).expect("svd converges");
    s.iter().filter(|&&v| v > rel * s[0]).count()
}

/// Grid-function prefixes in mixed precision.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (m, n) = (2000, 100);
    let prefixes: Vec<usize> = (1..=10).map(|i| 10 * i).collect();
    let w = gen_grid_matrix(m, n);
    let onset = prefixes.iter().copied().find(|&p| numerical_rank(&w.columns(0..p), 1e-7) < p);

    let cfg: SweepConfig = format!(
        "family = grid\nm = {m}\nn = {n}\nk = {}\nprefix = {}\nmethod = rrrcholqr, scholqr2\n\
         sketch = gaussian\nseed = 1\nprecision = mixed\ntau = 2e-7\n",
        2 * n,
        prefixes.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
    )
    .parse()
    .expect("config parses");
    let rows = run_sweep(&cfg, false).expect("sweep runs");
    let elapsed = start.elapsed();

    let past = |r: &&SweepRow| matches!((r.param, onset), (Param::Prefix(p), Some(o)) if p >= o);
    let rr: Vec<&SweepRow> = rows_of(&rows, Method::RrrCholQr).filter(past).collect();
    let sc: Vec<&SweepRow> = rows_of(&rows, Method::SCholQr2).filter(past).collect();
    let rr_ok = rr
        .iter()
        .all(|r| r.ok && r.cond_q.unwrap() <= 10.0 && r.max_col_residual.unwrap() <= 1e-5);
    let sc_ok = sc.iter().any(|r| !r.ok || r.cond_q.unwrap() > 1e3);
    let all_rr_cond = max_of(rows_of(&rows, Method::RrrCholQr), |r| r.cond_q);
    let all_rr_res = max_of(rows_of(&rows, Method::RrrCholQr), |r| r.max_col_residual);
    let all_sc_cond = max_of(rows_of(&rows, Method::SCholQr2), |r| r.cond_q);
    let t_ok = elapsed <= Duration::from_secs(120);
    outcome(
        onset.is_some() && rr_ok && sc_ok && t_ok,
        format!(
            "oracle onset (rank < width at 1e-7) among prefixes {:?}: {:?}; \
             past onset: rrrcholqr cond <= 10 and residual <= 1e-5: {} ({} rows), \
             scholqr2 cond > 1e3 somewhere: {} ({} rows); over all prefixes: rrrcholqr max cond {} max residual {}, \
             scholqr2 max cond {}; runtime {:.1}s (<= 120s)",
            (prefixes[0], prefixes[prefixes.len() - 1]),
            onset,
            rr_ok,
            rr.len(),
            sc_ok,
            sc.len(),
            fmt_max(all_rr_cond),
            fmt_max(all_rr_res),
            fmt_max(all_sc_cond),
            elapsed.as_secs_f64()
        ),
    )
}

/// Adversarial rank-deficient family.
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let scales = (0..=15).map(|e| format!("1e{e}")).collect::<Vec<_>>().join(", ");
    let cfg: SweepConfig = format!(
        "family = rankdef\nm = 2000\nn = 30\nk = 60\nsigma = {scales}\n\
         method = rrrcholqr2, rcholqr2, scholqr3\nsketch = gaussian\nseed = 1\nprecision = f64\ntau = 5e-16\n"
    )
    .parse()
    .expect("config parses");
    let rows = run_sweep(&cfg, false).expect("sweep runs");
    let elapsed = start.elapsed();
    let rr_delta = max_of(rows_of(&rows, Method::RrrCholQr2), |r| r.delta_orth);
    let rr_ok = rows_of(&rows, Method::RrrCholQr2).all(|r| r.ok) && rr_delta <= 1e-12;
    let degraded = |m| rows_of(&rows, m).filter(|r| !r.ok || r.delta_orth.unwrap() > 1e-8).count();
    let (d_r2, d_s3) = (degraded(Method::RCholQr2), degraded(Method::SCholQr3));
    let t_ok = elapsed <= Duration::from_secs(60);
    outcome(
        rr_ok && d_r2 + d_s3 > 0 && t_ok,
        format!(
            "rrrcholqr2 max delta_orth {} (<= 1e-12); degraded rows (delta > 1e-8 or failed): rcholqr2 {d_r2}, \
             scholqr3 {d_s3} (need >= 1); runtime {:.1}s (<= 60s)",
            fmt_max(rr_delta),
            elapsed.as_secs_f64()
        ),
    )
}

/// Residual, conditioning and sketch-gap bounds of rcholeskyqr.
fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = Vec::new();
    let (mut worst_res, mut worst_cond_margin, mut worst_gap) = (0.0f64, f64::INFINITY, 0.0f64);
    for t in 0..50u64 {
        let n = rng.gen_range(5..=100);
        let m = 2000;
        let cond_x = 10f64.powf(rng.gen_range(0.0..=10.0));
        let x = gen_svd_matrix(m, n, 1.0 / cond_x, 100 + t);
        let k = 8 * n;
        let kind = if t % 2 == 0 { SketchKind::Gaussian } else { SketchKind::Srht };
        let theta = SketchOperator::build(kind, k, m, 500 + t, None).unwrap();
        let f = match rcholeskyqr(&x, &theta, &PrecisionPolicy::F64) {
            Ok(f) => f,
            Err(e) => {
                violations.push(format!("#{t}: {e}"));
                continue;
            }
        };
        let q = f.q().unwrap().into_owned();
        let eps_hat = verify_embedding(&theta, &x, 0.5).epsilon_observed;
        let res = (0..n)
            .map(|j| {
                let d = q.matmul(&f.r.columns(j..j + 1)).sub(&x.columns(j..j + 1));
                d.frobenius_norm() / x.columns(j..j + 1).frobenius_norm()
            })
            .fold(0.0, f64::max);
        let cq = cond(&q).unwrap();
        let cond_bound = ((1.0 + eps_hat) / (1.0 - eps_hat)).sqrt() + 0.1;
        let gap = f.s.as_ref().unwrap().sub(&theta.apply(&q).unwrap()).frobenius_norm();
        let gap_bound = 100.0 * U64 * (n as f64).powf(1.5) * cond(&normalize(&x)).unwrap();
        worst_res = worst_res.max(res / (50.0 * U64 * n as f64));
        worst_cond_margin = worst_cond_margin.min(cond_bound - cq);
        worst_gap = worst_gap.max(gap / gap_bound);
        if !(eps_hat < 1.0) {
            violations.push(format!("#{t}: eps_hat {eps_hat:.3} >= 1"));
        }
        if res > 50.0 * U64 * n as f64 {
            violations.push(format!("#{t}: residual {res:.3e}"));
        }
        if !(cq <= cond_bound) {
            violations.push(format!("#{t}: cond(Q) {cq:.3} > {cond_bound:.3}"));
        }
        if !(gap <= gap_bound) {
            violations.push(format!("#{t}: sketch gap {gap:.3e} > {gap_bound:.3e}"));
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "50 matrices (n <= 100, cond <= 1e10, k = 8n, Gaussian/SRHT): {} violations {:?}; \
             max residual/bound {:.3}, min cond slack {:.3}, max gap/bound {:.3e}",
            violations.len(),
            violations,
            worst_res,
            worst_cond_margin,
            worst_gap
        ),
    )
}

fn gaussian(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Matrix<f64> {
    let normal = rand_distr::StandardNormal;
    Matrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(normal))
}

/// Matrices for the rank-revealing suites.
fn rank_suite_matrix(t: u64, rng: &mut ChaCha8Rng) -> Matrix<f64> {
    let m = 1000;
    let n = rng.gen_range(10..=40);
    match t % 5 {
        0 => gen_svd_matrix(m, n, 10f64.powf(-rng.gen_range(0.0..=8.0)), 700 + t),
        1 => gen_rankdef_matrix(m, n, 10f64.powi((t % 16) as i32), 700 + t),
        2 => {
            let r = n / 2;
            gaussian(m, r, rng).matmul(&gaussian(r, n, rng))
        }
        3 => {
            let a = gaussian(m, n / 2, rng);
            let idx: Vec<usize> = (0..n - n / 2).map(|j| j % (n / 2)).collect();
            a.hcat(&a.select_columns(&idx).scale(3.0))
        }
        _ => gen_svd_matrix(m, n, 1e-14, 700 + t),
    }
}

/// Pivoted-head conditioning and residual bounds of rrrcholeskyqr.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let taus = [4e-15, 1e-12, 1e-8, 1e-4];
    let mut violations = Vec::new();
    let (mut worst_head, mut worst_res) = (0.0f64, 0.0f64);
    for t in 0..50u64 {
        let x = rank_suite_matrix(t, &mut rng);
        let (m, n) = x.shape();
        let tau = taus[(t / 5) as usize % taus.len()];
        let theta = SketchOperator::gaussian(2 * n, m, 900 + t);
        let f = match rrrcholeskyqr(&x, &theta, tau, &PrecisionPolicy::F64) {
            Ok(f) => f,
            Err(e) => {
                violations.push(format!("#{t}: {e}"));
                continue;
            }
        };
        let r = f.rank;
        let xn = normalize(&x);
        let xp = f.perm.apply_columns(&xn);
        let head = cond(&xp.columns(0..r)).unwrap();
        let head_bound = 10.0 * (n as f64).powf(1.5) * r as f64 / tau;
        let q = f.q().unwrap().into_owned();
        let res = xp.sub(&q.matmul(&f.normalized_r())).frobenius_norm();
        let res_bound = 10.0 * tau * (n as f64).sqrt();
        worst_head = worst_head.max(head / head_bound);
        worst_res = worst_res.max(res / res_bound);
        if !(head <= head_bound) {
            violations.push(format!("#{t}: cond head {head:.3e} > {head_bound:.3e}"));
        }
        if !(res <= res_bound) {
            violations.push(format!("#{t} (n={n}, r={r}, tau={tau:e}): residual {res:.3e} > {res_bound:.3e}"));
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "50 matrices (full-rank, rankdef, exact low-rank, duplicated columns; tau in {taus:?}): {} violations {:?}; \
             max head-cond/bound {:.3e}, max residual/bound {:.3}",
            violations.len(),
            violations,
            worst_head,
            worst_res
        ),
    )
}

/// Quasi-optimality against the truncated SVD.
fn criterion_6() -> Outcome {
    let (m, n) = (200, 20);
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    let mut ranks = Vec::new();
    for t in 0..20u64 {
        let (spectrum, tau): (Vec<f64>, f64) = if t % 2 == 0 {
            // gap after r0 leading values
            let r0 = 3 + (t as usize % 15);
            ((0..n).map(|i| if i < r0 { 1.0 / (1.0 + i as f64) } else { 1e-8 * 0.8f64.powi(i as i32) }).collect(), 1e-5)
        } else {
            ((0..n).map(|i| 10f64.powf(-(i as f64) / 2.0)).collect(), 1e-6)
        };
        let u = random_orthonormal(m, n, 40 + t);
        let v = random_orthonormal(n, n, 80 + t);
        let x = u.matmul(&Matrix::from_diag(&spectrum)).matmul(&v.transpose());
        let theta = SketchOperator::gaussian(2 * n, m, 120 + t);
        let f = rrrcholeskyqr(&x, &theta, tau, &PrecisionPolicy::F64).expect("factorization succeeds");
        let r = f.rank;
        ranks.push(r);
        let xn = normalize(&x);
        let q = f.q().unwrap().into_owned();
        let res = f.perm.apply_columns(&xn).sub(&q.matmul(&f.normalized_r())).frobenius_norm();
        let sv = svd_small(&xn).unwrap().singular_values;
        let optimum = sv[r..].iter().map(|s| s * s).sum::<f64>().sqrt();
        let c = 3.0 * ((r * (n - r)) as f64 * RRQR_F * RRQR_F + 1.0).sqrt();
        worst = worst.max(res / (c * optimum));
        if !(res <= c * optimum) {
            violations.push(format!("#{t} (r={r}): {res:.3e} > {c:.1} * {optimum:.3e}"));
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "20 matrices 200x20 (detected ranks {ranks:?}): {} violations {:?}; max residual/bound {:.3}",
            violations.len(),
            violations,
            worst
        ),
    )
}

fn hadamard(n: usize) -> Matrix<f64> {
    let mut h = Matrix::from_fn(1, 1, |_, _| 1.0);
    while h.rows() < n {
        let k = h.rows();
        h = Matrix::from_fn(2 * k, 2 * k, |i, j| {
            let v = h.get(i % k, j % k);
            if i >= k && j >= k {
                -v
            } else {
                v
            }
        });
    }
    h.scale(1.0 / (n as f64).sqrt())
}

/// Oracle equivalences.
fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut notes = Vec::new();

    // SRHT fast path against the materialized operator.
    let mut srht_ok = true;
    for m in [2, 5, 8, 13, 33, 47, 64] {
        for k in [1, m.min(4), m.min(2 * m / 3).max(1)] {
            let theta = SketchOperator::srht(k, m, (m * 31 + k) as u64).unwrap();
            let x = Matrix::from_fn(m, 3, |_, _| rng.gen_range(-20i32..=20) as f64);
            let fast = theta.apply(&x).unwrap();
            let dense = theta.apply_dense(&x);
            if fast.as_slice().iter().zip(dense.as_slice()).any(|(a, b)| a.to_bits() != b.to_bits()) {
                srht_ok = false;
                notes.push(format!("srht m={m} k={k} differs"));
            }
        }
    }

    // fwht against the Sylvester Hadamard matrix.
    let mut fwht_err = 0.0f64;
    for p in 0..=10 {
        let n = 1usize << p;
        let h = hadamard(n);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut y = x.clone();
        fwht(&mut y).unwrap();
        let want = h.matmul(&Matrix::from_col_major(n, 1, x).unwrap());
        let err = y.iter().zip(want.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        fwht_err = fwht_err.max(err);
    }
    let fwht_ok = fwht_err <= 1e-14;

    // Strong RRQR leading blocks against the best column subset.
    let mut rrqr_ok = true;
    let mut worst_ratio = f64::INFINITY;
    for t in 0..40 {
        let mut p = gaussian(6, 4, &mut rng);
        if t % 3 == 1 {
            let c: Vec<f64> = p.col(0).iter().zip(p.col(1)).map(|(a, b)| a + b + 1e-9 * t as f64).collect();
            p.col_mut(3).copy_from_slice(&c);
        }
        if t % 3 == 2 {
            let s = 10f64.powi(-(t % 12));
            p.col_mut(2).iter_mut().for_each(|v| *v *= s);
        }
        let f = strong_rrqr(&p, RRQR_F).unwrap();
        for k in 1..4 {
            let lead = singular_values(&f.r.block(0..k, 0..k)).unwrap()[k - 1];
            let best = (0u32..16)
                .filter(|s| s.count_ones() as usize == k)
                .map(|s| {
                    let idx: Vec<usize> = (0..4).filter(|j| s >> j & 1 == 1).collect();
                    singular_values(&p.select_columns(&idx)).unwrap()[k - 1]
                })
                .fold(0.0, f64::max);
            let factor = (1.0 + RRQR_F * RRQR_F * (k * (4 - k)) as f64).sqrt();
            worst_ratio = worst_ratio.min(lead * factor / best);
            if lead * factor < best * (1.0 - 1e-12) {
                rrqr_ok = false;
                notes.push(format!("rrqr #{t} k={k}: {lead:.3e} * {factor:.2} < {best:.3e}"));
            }
        }
    }

    // Single-block column-oriented factorization against the direct one.
    let mut col_ok = true;
    let mut worst_col = 0.0f64;
    for t in 0..6u64 {
        let n = 5 + 7 * t as usize;
        let x = gen_svd_matrix(800, n, 10f64.powi(-(t as i32) * 2), 300 + t);
        let theta = SketchOperator::gaussian(2 * n, 800, 301 + t);
        let a = rcholeskyqr(&x, &theta, &PrecisionPolicy::F64).unwrap();
        let b = col_rcholeskyqr(BlockSource::from_matrix(&x, 1), &theta, &PrecisionPolicy::F64, false).unwrap();
        let diff = a.r.sub(&b.r).frobenius_norm();
        let bound = 100.0 * n as f64 * U64 * a.r.frobenius_norm();
        worst_col = worst_col.max(diff / bound);
        if !(diff <= bound) {
            col_ok = false;
            notes.push(format!("col-rcholqr n={n}: {diff:.3e} > {bound:.3e}"));
        }
    }

    outcome(
        srht_ok && fwht_ok && rrqr_ok && col_ok,
        format!(
            "SRHT bit-exact: {srht_ok}; fwht max error {} (<= 1e-14); strong RRQR within f-bound: {rrqr_ok} \
             (min slack ratio {:.3}); col-rcholqr single block R agreement: {col_ok} (max diff/bound {:.3e}){}",
            fmt_max(fwht_err),
            worst_ratio,
            worst_col,
            if notes.is_empty() { String::new() } else { format!("; {notes:?}") }
        ),
    )
}

/// Embedding Monte Carlo and the OSE-dimension example.
fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [SketchKind::Gaussian, SketchKind::Srht] {
        for d in [5, 10, 20] {
            let r = embed_check(kind, 4 * d, d, 1024, 100, 0.5, 8 + d as u64).expect("sketch builds");
            let ok = r.passes() >= 95;
            pass &= ok;
            parts.push(format!("{} d={d}: {}/100", kind.name(), r.passes()));
        }
    }
    let dim = ose_dim(SketchKind::Gaussian, 0.5, 1e-2, 10, usize::MAX);
    pass &= dim == 2317;
    outcome(
        pass,
        format!(
            "k = 4d, epsilon_observed <= 0.5 in >= 95/100: [{}]; ose_dim(gaussian, 0.5, 1e-2, 10) = {dim} (want 2317)",
            parts.join(", ")
        ),
    )
}

/// Block GMRES demo.
fn criterion_9() -> Outcome {
    let lap = ShiftedLaplacian::new(32, 0.2);
    let op = |x: &Matrix<f64>| lap.apply(x);
    let mut rgs_ok = true;
    let mut ordered = 0;
    let mut parts = Vec::new();
    for seed in 1..=3u64 {
        let run = |orth| {
            let mut cfg = GmresConfig::new(&op, seeded_rhs(lap.dim(), 4, seed));
            cfg.orth = orth;
            cfg.restart = 30;
            cfg.k = 2 * 30 * 4;
            cfg.seed = seed;
            block_gmres(&cfg).expect("gmres runs")
        };
        let rgs = run(OrthMethod::Rgs);
        let col = run(OrthMethod::ColRcholQr);
        let rgs_max = rgs.cond_history.iter().copied().fold(0.0, f64::max);
        let ok = rgs.breakdown.is_none() && rgs_max <= 10.0 && rgs.final_residual() <= 1e-8;
        rgs_ok &= ok;
        let (rl, cl) = (
            rgs.cond_history.last().copied().unwrap_or(f64::NAN),
            col.cond_history.last().copied().unwrap_or(f64::NAN),
        );
        if cl >= rl || col.breakdown.is_some() {
            ordered += 1;
        }
        parts.push(format!(
            "seed {seed}: rgs max cond {rgs_max:.3} final residual {:.2e} ({} its); col-rcholqr final cond {cl:.3} vs rgs {rl:.3}",
            rgs.final_residual(),
            rgs.iterations()
        ));
    }
    outcome(
        rgs_ok && ordered >= 2,
        format!(
            "m = 1024, block 4, restart 30; rgs cond <= 10 and residual <= 1e-8: {rgs_ok}; \
             col-rcholqr cond >= rgs at the end in {ordered}/3 seeds (need 2); {}",
            parts.join("; ")
        ),
    )
}

/// Determinism of sweeps.
fn criterion_10() -> Outcome {
    let configs = [
        "family = svd\nm = 1024\nn = 12\nsigma = 1, 1e-6, 1e-12\n\
         method = cholqr2, scholqr3, rcholqr, rcholqr2, rrrcholqr2, col-rcholqr, rgs\n\
         sketch = gaussian, srht, leverage\nseed = 1, 2\nblock = 3\n",
        "family = grid\nm = 500\nn = 40\nprefix = 10, 40\nmethod = rrrcholqr, scholqr2\nprecision = mixed\nseed = 3\n",
        "family = rankdef\nm = 600\nn = 15\nsigma = 1, 1e10\nmethod = rrrcholqr2, rcholqr2\nsketch = srht\ntau = 5e-16\n",
    ];
    let mut identical = true;
    let mut rows = 0;
    for text in configs {
        let cfg: SweepConfig = text.parse().expect("config parses");
        let csv = || {
            let r = run_sweep(&cfg, true).expect("sweep runs");
            let mut buf = Vec::new();
            write_csv(&mut buf, &r).unwrap();
            (buf, r.len())
        };
        let (a, n) = csv();
        let (b, _) = csv();
        identical &= a == b;
        rows += n;
    }
    outcome(identical, format!("3 configs, {rows} rows: reruns byte-identical: {identical}"))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = Vec::new();
    for (i, run) in criteria {
        if only.is_some_and(|o| o != i) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {i}: {status} [{:.1}s] {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed.push(i);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
