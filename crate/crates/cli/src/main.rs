use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::info;

use sketchqr::baselines::ShiftBase;
use sketchqr::harness::io::{read_matrix, write_matrix};
use sketchqr::harness::{
    block_gmres, embed_check, run_method, run_sweep, seeded_rhs, stability_report, write_csv, GmresConfig, Method,
    MethodConfig, OrthMethod, ShiftedLaplacian, SweepConfig,
};
use sketchqr::sketch::ose_dim;
use sketchqr::{DenseMatrix, Matrix, PrecisionPolicy, SketchKind};

const EXIT_NUMERICAL: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "sketchqr", version, about = "Randomized Cholesky QR factorizations and stability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor one matrix file and write Q, R, the permutation and a report.
    Qr(QrArgs),
    /// Run a config-driven sweep and write CSV.
    Sweep(SweepArgs),
    /// Monte Carlo check of the subspace-embedding property.
    EmbedCheck(EmbedArgs),
    /// Block GMRES on a shifted 2-D Laplacian.
    GmresDemo(GmresArgs),
}

#[derive(Args)]
struct QrArgs {
    /// Input matrix (`.mtx` Matrix Market or `.sqrm` binary).
    input: PathBuf,
    #[arg(long, default_value = "rcholqr2")]
    method: Method,
    #[arg(long, default_value = "gaussian")]
    sketch: SketchKind,
    /// Sketch dimension (default 2n).
    #[arg(long)]
    k: Option<usize>,
    /// Rank truncation tolerance of the rank-revealing methods.
    #[arg(long)]
    tau: Option<f64>,
    /// f64, f32 or mixed.
    #[arg(long, default_value = "f64")]
    precision: PrecisionPolicy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Block width of col-rcholqr and rgs.
    #[arg(long, default_value_t = 1)]
    block: usize,
    /// First-stage shift of scholqr2/scholqr3: zero, recommended or empirical.
    #[arg(long, default_value = "empirical")]
    shift: ShiftBase,
    /// Output directory for q, r, perm and report files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write factors as `.sqrm` binary instead of Matrix Market.
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    /// CSV output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run rows serially in config order.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long, default_value = "gaussian")]
    sketch: SketchKind,
    /// Sketch dimension (default 4d).
    #[arg(long)]
    k: Option<usize>,
    /// Subspace dimension.
    #[arg(long, default_value_t = 10)]
    d: usize,
    /// Ambient dimension.
    #[arg(long, default_value_t = 1024)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Failure probability used for the printed theoretical sketch size.
    #[arg(long, default_value_t = 1e-2)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GmresArgs {
    /// bcgs2, col-rcholqr or rgs.
    #[arg(long, default_value = "rgs")]
    orth: OrthMethod,
    /// Grid points per side; the operator has grid² rows.
    #[arg(long, default_value_t = 32)]
    grid: usize,
    #[arg(long, default_value_t = 0.2)]
    shift: f64,
    /// Right-hand side columns.
    #[arg(long, default_value_t = 4)]
    block: usize,
    #[arg(long, default_value_t = 30)]
    restart: usize,
    /// Sketch dimension (default 2 · restart · block).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 20)]
    max_cycles: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV file for the per-iteration history (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn qr(args: QrArgs) -> anyhow::Result<()> {
    let input = read_matrix(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let x = input.to_f64();
    let cfg = MethodConfig {
        sketch: args.sketch,
        k: args.k,
        seed: args.seed,
        tau: args.tau,
        policy: args.precision,
        block: args.block,
        shift: args.shift,
    };
    let theta = if args.method.uses_sketch() {
        Some(cfg.build_sketch(&x)?)
    } else {
        None
    };
    info!("factoring {}x{} with {}", x.rows(), x.cols(), args.method);
    let f = run_method(args.method, &x, theta.as_ref(), &cfg)?;
    let report = stability_report(&x, &f, theta.as_ref(), args.method.name(), Some(args.seed), args.precision.flag());
    print!("{report}");
    if let Some(dir) = args.out {
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let ext = if args.binary { "sqrm" } else { "mtx" };
        let store = |m: &Matrix<f64>| match args.precision.working() {
            sketchqr::Precision::Binary32 => DenseMatrix::F32(m.cast()),
            sketchqr::Precision::Binary64 => DenseMatrix::F64(m.clone()),
        };
        write_matrix(&dir.join(format!("q.{ext}")), &store(&f.q))?;
        write_matrix(&dir.join(format!("r.{ext}")), &store(&f.r))?;
        if let Some(p) = &f.perm {
            let text: String = p.as_slice().iter().map(|j| format!("{j}\n")).collect();
            fs::write(dir.join("perm.txt"), text)?;
        }
        fs::write(dir.join("report.txt"), report.to_string())?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let cfg = SweepConfig::from_path(&args.config)?;
    let rows = run_sweep(&cfg, args.deterministic)?;
    let failed = rows.iter().filter(|r| !r.ok).count();
    info!("{} rows, {failed} failed", rows.len());
    write_csv(output(args.out.as_deref())?, &rows)?;
    Ok(())
}

fn embed(args: EmbedArgs) -> anyhow::Result<()> {
    let k = args.k.unwrap_or(4 * args.d);
    let r = embed_check(args.sketch, k, args.d, args.m, args.trials, args.epsilon, args.seed)?;
    let worst = r.observed.iter().copied().fold(0.0, f64::max);
    println!("sketch = {}", args.sketch.name());
    println!("k = {k}");
    println!("d = {}", args.d);
    println!("m = {}", args.m);
    println!("epsilon = {}", args.epsilon);
    println!("passed = {}/{}", r.passes(), r.trials());
    println!("worst_epsilon_observed = {worst:e}");
    println!(
        "ose_dim(delta = {}) = {}",
        args.delta,
        ose_dim(args.sketch, args.epsilon, args.delta, args.d, usize::MAX)
    );
    Ok(())
}

fn gmres(args: GmresArgs) -> anyhow::Result<()> {
    let lap = ShiftedLaplacian::new(args.grid, args.shift);
    let op = |x: &Matrix<f64>| lap.apply(x);
    let mut cfg = GmresConfig::new(&op, seeded_rhs(lap.dim(), args.block, args.seed));
    cfg.orth = args.orth;
    cfg.restart = args.restart;
    cfg.k = args.k.unwrap_or(2 * args.restart * args.block);
    cfg.tol = args.tol;
    cfg.max_cycles = args.max_cycles;
    cfg.seed = args.seed;
    let out = block_gmres(&cfg)?;
    let mut w = output(args.out.as_deref())?;
    writeln!(w, "iteration,max_col_residual,basis_cond")?;
    for (i, res) in out.residual_history.iter().enumerate() {
        let c = out.cond_history.get(i).map(|c| format!("{c:e}")).unwrap_or_default();
        writeln!(w, "{},{res:e},{c}", i + 1)?;
    }
    w.flush()?;
    eprintln!(
        "{} iterations, final residual {:e}, converged = {}",
        out.iterations(),
        out.final_residual(),
        out.converged
    );
    if let Some(e) = out.breakdown {
        return Err(e.into());
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<sketchqr::Error>() {
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Qr(a) => qr(a),
        Command::Sweep(a) => sweep(a),
        Command::EmbedCheck(a) => embed(a),
        Command::GmresDemo(a) => gmres(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
