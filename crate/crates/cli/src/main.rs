//! `lrtc` — low-rank tensor completion from noisy entries.
//!
//! Verbs: `gen` (synthesize test tensors), `complete` (estimate from an
//! observation CSV), `sweep` (Monte-Carlo sample-complexity benchmark),
//! `denoise` (subsample + reconstruct a dense volume), `diag`
//! (coherence/spikiness/spectrum of a tensor file).

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lrtc::denoise::{denoise_tensor, DenoiseOptions};
use lrtc::io;
use lrtc::sweep::{run_sweep, Method, SweepConfig};
use lrtc_core::completion::{
    complete, default_iter_max, CompletionConfig, InitMethod, LambdaMode, DEFAULT_STOP_TOL,
};
use lrtc_core::obs::{sample_dataset, NoiseSpec};
use lrtc_core::rng::stream_rng;
use lrtc_core::spectra::mode_spectrum;
use lrtc_core::synth::{
    generate, relative_error, spikiness, tensor_coherence, ModelKind, ModelSpec,
};

#[derive(Parser)]
#[command(name = "lrtc", version, about = "Low-rank tensor completion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic low-rank tensor (and optionally observations).
    Gen(GenArgs),
    /// Estimate a tensor from an observation CSV.
    Complete(CompleteArgs),
    /// Run a Monte-Carlo sample-complexity sweep to a result CSV.
    Sweep(SweepArgs),
    /// Subsample a dense tensor under noise and reconstruct it.
    Denoise(DenoiseArgs),
    /// Print diagnostics of a tensor file.
    Diag(DiagArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Tucker,
    CpOrtho,
    CpSymGauss,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Spectral,
    Hosvd,
}

#[derive(Args)]
struct GenArgs {
    /// Model family.
    #[arg(long, value_enum, default_value = "cp-ortho")]
    kind: KindArg,
    /// Mode extents, comma separated (e.g. 50,50,50).
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    /// Per-mode Tucker ranks, comma separated.
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    /// Common CP rank.
    #[arg(long)]
    r: Option<usize>,
    /// Scale of each rank-one term (CP families). Default sqrt(prod dims).
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output tensor file (TNSR1).
    #[arg(long)]
    out: PathBuf,
    /// Also sample observations into this CSV.
    #[arg(long)]
    obs_out: Option<PathBuf>,
    /// Number of observations for --obs-out.
    #[arg(long)]
    n: Option<usize>,
    /// Gaussian noise level for --obs-out.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
}

#[derive(Args)]
struct CompleteArgs {
    /// Observation CSV.
    #[arg(long)]
    obs: PathBuf,
    /// Ambient mode extents, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    /// Per-mode target ranks, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    ranks: Vec<usize>,
    /// Threshold: "auto" or a nonnegative number.
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    lambda: LambdaMode,
    /// Power sweeps; defaults to max(10, ceil(4 ln d_max)).
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, value_enum, default_value = "spectral")]
    init: InitArg,
    #[arg(long, default_value_t = DEFAULT_STOP_TOL)]
    stop_tol: f64,
    /// Where to write the completed tensor (TNSR1).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ground-truth tensor file; prints the relative error when given.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Cubic mode extent.
    #[arg(long)]
    d: usize,
    /// CP rank of the truth and the estimators' target.
    #[arg(long)]
    r: usize,
    /// Tensor order.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Exponent grid for n = round(r d^alpha): "lo:hi:step" or a single value.
    #[arg(long)]
    alpha_grid: AlphaGrid,
    #[arg(long, default_value_t = 30)]
    reps: u32,
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    /// Comma-separated subset of hosvd,spectral,spectral-power.
    #[arg(long, default_value = "hosvd,spectral,spectral-power")]
    methods: MethodList,
    #[arg(long, default_value_t = 10)]
    iters: usize,
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    lambda: LambdaMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Parallel replicate limit.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write zeros in the wall_time_s column for byte-identical reruns.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct DenoiseArgs {
    /// Input tensor file (TNSR1).
    #[arg(long)]
    input: PathBuf,
    /// Per-mode target ranks, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    ranks: Vec<usize>,
    /// Fraction of entries to observe, in (0, 1].
    #[arg(long)]
    sample_ratio: f64,
    /// Noise level: sigma = gamma * sqrt(||T||^2 / total).
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the reconstruction (TNSR1).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    lambda: LambdaMode,
}

#[derive(Args)]
struct DiagArgs {
    /// Input tensor file (TNSR1).
    #[arg(long)]
    input: PathBuf,
    /// Ranks at which to read off the per-mode spectrum; inferred
    /// numerically when omitted.
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
struct AlphaGrid(Vec<f64>);

impl std::str::FromStr for AlphaGrid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_alpha_grid(s).map(AlphaGrid)
    }
}

#[derive(Debug, Clone)]
struct MethodList(Vec<Method>);

impl std::str::FromStr for MethodList {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_methods(s).map(MethodList)
    }
}

fn parse_lambda(s: &str) -> Result<LambdaMode> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(LambdaMode::Auto);
    }
    let v: f64 = s.parse().with_context(|| format!("bad lambda {s:?}"))?;
    if !v.is_finite() || v < 0.0 {
        bail!("lambda must be nonnegative, got {v}");
    }
    Ok(LambdaMode::Fixed(v))
}

fn parse_alpha_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![single
            .parse()
            .with_context(|| format!("bad alpha {single:?}"))?]),
        [lo, hi, step] => {
            let lo: f64 = lo.parse().context("bad grid start")?;
            let hi: f64 = hi.parse().context("bad grid end")?;
            let step: f64 = step.parse().context("bad grid step")?;
            if step <= 0.0 || hi < lo {
                bail!("alpha grid needs lo <= hi and step > 0");
            }
            let mut grid = Vec::new();
            let mut i = 0usize;
            loop {
                let a = lo + step * i as f64;
                if a > hi + 1e-9 {
                    break;
                }
                grid.push(a);
                i += 1;
            }
            Ok(grid)
        }
        _ => bail!("alpha grid must be a single value or lo:hi:step"),
    }
}

fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let methods: Vec<Method> = s
        .split(',')
        .map(|f| f.trim().parse::<Method>())
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        bail!("no methods given");
    }
    Ok(methods)
}

fn run_gen(args: GenArgs) -> Result<()> {
    if args.dims.len() < 2 {
        bail!("--dims needs at least two modes");
    }
    let spec = match args.kind {
        KindArg::Tucker => {
            let ranks = args.ranks.clone().context("--kind tucker needs --ranks")?;
            ModelSpec {
                kind: ModelKind::Tucker,
                dims: args.dims.clone(),
                ranks,
                scale: None,
                seed: args.seed,
            }
        }
        KindArg::CpOrtho | KindArg::CpSymGauss => {
            let r = match (args.r, &args.ranks) {
                (Some(r), _) => r,
                (None, Some(ranks)) if ranks.iter().all(|&x| x == ranks[0]) => ranks[0],
                _ => bail!("CP families need --r (or equal --ranks)"),
            };
            let kind = match args.kind {
                KindArg::CpOrtho => ModelKind::CpOrtho,
                _ => ModelKind::CpSymGauss,
            };
            ModelSpec {
                kind,
                dims: args.dims.clone(),
                ranks: vec![r; args.dims.len()],
                scale: args.scale,
                seed: args.seed,
            }
        }
    };
    let (t, _) = generate(&spec)?;
    io::write_tensor(&args.out, &t)?;
    println!(
        "wrote {} ({} entries, l2 norm {:.6e})",
        args.out.display(),
        t.len(),
        t.l2_norm()
    );
    if let Some(obs_path) = args.obs_out {
        let n = args.n.context("--obs-out needs --n")?;
        let mut rng = stream_rng(args.seed, 1);
        let data = sample_dataset(&t, n, &NoiseSpec::new(args.sigma)?, &mut rng)?;
        io::write_dataset(&obs_path, &data)?;
        println!(
            "wrote {} ({} observations, sigma {})",
            obs_path.display(),
            n,
            args.sigma
        );
    }
    Ok(())
}

fn run_complete(args: CompleteArgs) -> Result<()> {
    let data = io::read_dataset(&args.obs, &args.dims)?;
    let cfg = CompletionConfig {
        ranks: args.ranks.clone(),
        iter_max: args.iters.unwrap_or_else(|| default_iter_max(&args.dims)),
        lambda: args.lambda,
        stop_tol: args.stop_tol,
        init_method: match args.init {
            InitArg::Spectral => InitMethod::Spectral,
            InitArg::Hosvd => InitMethod::Hosvd,
        },
    };
    let est = complete(&data, &cfg)?;
    println!(
        "completed: n={} lambda_used={:.6e} init_ranks={:?} sweeps={} final_change={:.3e}",
        data.len(),
        est.lambda_used,
        est.init_ranks_selected,
        est.trace.len(),
        est.trace.last().copied().unwrap_or(0.0)
    );
    if let Some(truth_path) = args.truth {
        let truth = io::read_tensor(&truth_path)?;
        println!("rel_error={:.6e}", relative_error(&est.t_hat, &truth)?);
    }
    if let Some(out) = args.out {
        io::write_tensor(&out, &est.t_hat)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn run_sweep_cmd(args: SweepArgs) -> Result<()> {
    let cfg = SweepConfig {
        d: args.d,
        r: args.r,
        k: args.k,
        alpha_grid: args.alpha_grid.0,
        reps: args.reps,
        sigma: args.sigma,
        methods: args.methods.0,
        iter_max: args.iters,
        lambda: args.lambda,
        seed: args.seed,
        out: Some(args.out.clone()),
        jobs: args.jobs,
        timing: !args.no_timing,
    };
    let rows = run_sweep(&cfg)?;
    println!("wrote {} ({} rows)", args.out.display(), rows.len());
    Ok(())
}

fn run_denoise(args: DenoiseArgs) -> Result<()> {
    let input = io::read_tensor(&args.input)?;
    let opts = DenoiseOptions {
        iter_max: args.iters,
        lambda: args.lambda,
        stop_tol: DEFAULT_STOP_TOL,
    };
    let (t_hat, report) = denoise_tensor(
        &input,
        &args.ranks,
        args.sample_ratio,
        args.gamma,
        args.seed,
        &opts,
    )?;
    println!(
        "denoise: dims={:?} ranks={:?} projected_input={} n={} sigma={:.6e} rel_error={:.6e} lambda_used={:.6e} sweeps={}",
        report.dims,
        report.ranks,
        report.projected_input,
        report.n,
        report.sigma,
        report.rel_error,
        report.lambda_used,
        report.iters_run
    );
    if let Some(out) = args.out {
        io::write_tensor(&out, &t_hat)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn run_diag(args: DiagArgs) -> Result<()> {
    let t = io::read_tensor(&args.input)?;
    println!(
        "dims={:?} entries={} l2={:.6e} linf={:.6e}",
        t.dims(),
        t.len(),
        t.l2_norm(),
        t.max_abs()
    );
    let ranks = match args.ranks {
        Some(r) => r,
        None => {
            // numerical multilinear ranks at the 1e-10 relative cutoff
            let mut inferred = Vec::with_capacity(t.order());
            for j in 0..t.order() {
                let sigma = lrtc_core::spectra::singular_values(&t.matricize(j)?)?;
                let smax = sigma[0].max(f64::MIN_POSITIVE);
                inferred.push(
                    sigma
                        .iter()
                        .take_while(|&&s| s > 1e-10 * smax)
                        .count()
                        .max(1),
                );
            }
            println!("inferred ranks={inferred:?}");
            inferred
        }
    };
    let spectrum = mode_spectrum(&t, &ranks)?;
    for j in 0..t.order() {
        println!(
            "mode {j}: sigma_max={:.6e} sigma_r={:.6e}",
            spectrum.sigma_max[j], spectrum.sigma_min[j]
        );
    }
    println!(
        "lambda_min={:.6e} lambda_max={:.6e} kappa={:.6e}",
        spectrum.lambda_min, spectrum.lambda_max, spectrum.kappa
    );
    println!("coherence={:.6}", tensor_coherence(&t)?);
    println!("spikiness={:.6}", spikiness(&t)?);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen(args) => run_gen(args),
        Command::Complete(args) => run_complete(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::Denoise(args) => run_denoise(args),
        Command::Diag(args) => run_diag(args),
    }
}
