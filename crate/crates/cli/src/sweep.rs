//! Monte-Carlo sample-complexity sweeps: for each point of an
//! `n = r * d^alpha` grid and each replicate, generate a random
//! orthogonal CP truth, sample noisy entries and run the configured
//! estimators. One CSV row per (alpha, replicate, method).
//!
//! Replicates draw from streams derived as `(master seed,
//! alpha_index << 32 | rep)`, so every method sees the same realization
//! and results do not depend on execution order or the jobs limit.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use lrtc_core::completion::{complete, CompletionConfig, InitMethod, LambdaMode, DEFAULT_STOP_TOL};
use lrtc_core::obs::{sample_dataset, NoiseSpec};
use lrtc_core::rng::{pack_stream, stream_rng};
use lrtc_core::synth::{generate_with, relative_error, subspace_error, ModelSpec};

/// Estimators the sweep can run, in canonical output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    /// Projection onto the truncated HOSVD of the dense estimate.
    Hosvd,
    /// Projection onto the U-statistic spectral initialization.
    Spectral,
    /// Spectral initialization followed by power sweeps.
    SpectralPower,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Hosvd, Method::Spectral, Method::SpectralPower];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Hosvd => "HOSVD",
            Method::Spectral => "SPECTRAL",
            Method::SpectralPower => "SPECTRAL_POWER",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "hosvd" | "naive" => Ok(Method::Hosvd),
            "spectral" | "u" => Ok(Method::Spectral),
            "spectral_power" | "u_power" | "power" => Ok(Method::SpectralPower),
            other => bail!("unknown method {other:?}"),
        }
    }
}

/// Sweep parameters.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Cubic mode extent.
    pub d: usize,
    /// CP rank of the truth and target rank of the estimators.
    pub r: usize,
    /// Tensor order.
    pub k: usize,
    /// Exponents of `n = round(r * d^alpha)`.
    pub alpha_grid: Vec<f64>,
    pub reps: u32,
    pub sigma: f64,
    pub methods: Vec<Method>,
    /// Power sweeps for the SPECTRAL_POWER method.
    pub iter_max: usize,
    pub lambda: LambdaMode,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Parallel task limit.
    pub jobs: usize,
    /// Record wall-clock times; disable for byte-identical outputs.
    pub timing: bool,
}

impl SweepConfig {
    pub fn new(d: usize, r: usize, alpha_grid: Vec<f64>) -> Self {
        SweepConfig {
            d,
            r,
            k: 3,
            alpha_grid,
            reps: 1,
            sigma: 0.0,
            methods: Method::ALL.to_vec(),
            iter_max: 10,
            lambda: LambdaMode::Auto,
            seed: 0,
            out: None,
            jobs: 1,
            timing: true,
        }
    }

    fn sample_size(&self, alpha: f64) -> usize {
        (self.r as f64 * (self.d as f64).powf(alpha)).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if self.k < 2 {
            bail!("tensor order must be at least 2, got {}", self.k);
        }
        if self.r == 0 || self.r > self.d {
            bail!("rank {} out of range for d = {}", self.r, self.d);
        }
        if self.alpha_grid.is_empty() {
            bail!("alpha grid is empty");
        }
        if self.reps == 0 {
            bail!("reps must be at least 1");
        }
        if self.methods.is_empty() {
            bail!("no methods selected");
        }
        if self.jobs == 0 {
            bail!("jobs must be at least 1");
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            bail!("sigma must be finite and nonnegative, got {}", self.sigma);
        }
        for &alpha in &self.alpha_grid {
            let n = self.sample_size(alpha);
            if n < 2 {
                bail!("alpha = {alpha} gives n = {n} < 2");
            }
        }
        Ok(())
    }
}

/// One CSV record.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub method: Method,
    pub d: usize,
    pub r: usize,
    pub alpha: f64,
    pub n: usize,
    pub sigma: f64,
    /// Replicate index within its grid point.
    pub seed: u32,
    pub rel_error: f64,
    pub subspace_err_max: f64,
    pub iters_run: usize,
    pub lambda_used: f64,
    pub wall_time_s: f64,
}

pub const RESULT_HEADER: &str =
    "method,d,r,alpha,n,sigma,seed,rel_error,subspace_err_max,iters_run,lambda_used,wall_time_s";

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.d,
            self.r,
            self.alpha,
            self.n,
            self.sigma,
            self.seed,
            self.rel_error,
            self.subspace_err_max,
            self.iters_run,
            self.lambda_used,
            self.wall_time_s
        )
    }
}

fn run_replicate(cfg: &SweepConfig, alpha_idx: usize, rep: u32) -> Result<Vec<ResultRow>> {
    let alpha = cfg.alpha_grid[alpha_idx];
    let n = cfg.sample_size(alpha);
    let mut rng = stream_rng(cfg.seed, pack_stream(alpha_idx as u32, rep));
    let spec = ModelSpec::cp_ortho(cfg.d, cfg.k, cfg.r, None, 0);
    let (truth_tensor, truth_factors) = generate_with(&spec, &mut rng)?;
    let noise = NoiseSpec::new(cfg.sigma)?;
    let data = sample_dataset(&truth_tensor, n, &noise, &mut rng)?;

    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let completion = CompletionConfig {
            ranks: vec![cfg.r; cfg.k],
            iter_max: match method {
                Method::SpectralPower => cfg.iter_max,
                _ => 0,
            },
            lambda: cfg.lambda,
            stop_tol: DEFAULT_STOP_TOL,
            init_method: match method {
                Method::Hosvd => InitMethod::Hosvd,
                _ => InitMethod::Spectral,
            },
        };
        let start = Instant::now();
        let est = complete(&data, &completion)?;
        let wall = start.elapsed().as_secs_f64();
        let rel_error = relative_error(&est.t_hat, &truth_tensor)?;
        let subspace_err_max = subspace_error(&est.factors, &truth_factors)?
            .into_iter()
            .fold(0.0f64, f64::max);
        rows.push(ResultRow {
            method,
            d: cfg.d,
            r: cfg.r,
            alpha,
            n,
            sigma: cfg.sigma,
            seed: rep,
            rel_error,
            subspace_err_max,
            iters_run: est.trace.len(),
            lambda_used: est.lambda_used,
            wall_time_s: if cfg.timing { wall } else { 0.0 },
        });
    }
    Ok(rows)
}

/// Runs the sweep, writes the CSV when an output path is configured,
/// and returns the rows in deterministic (alpha, rep, method) order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let tasks: Vec<(usize, u32)> = (0..cfg.alpha_grid.len())
        .flat_map(|ai| (0..cfg.reps).map(move |rep| (ai, rep)))
        .collect();
    let mut slots: Vec<Option<Result<Vec<ResultRow>>>> = Vec::new();
    slots.resize_with(tasks.len(), || None);
    let slots = Mutex::new(slots);
    let next = AtomicUsize::new(0);
    let workers = cfg.jobs.min(tasks.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= tasks.len() {
                    break;
                }
                let (ai, rep) = tasks[i];
                let out = run_replicate(cfg, ai, rep);
                slots.lock().expect("worker panicked")[i] = Some(out);
            });
        }
    });
    let mut rows = Vec::with_capacity(tasks.len() * cfg.methods.len());
    for slot in slots.into_inner().expect("worker panicked") {
        rows.extend(slot.expect("every task ran")?);
    }
    if let Some(path) = &cfg.out {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{RESULT_HEADER}")?;
        for row in &rows {
            writeln!(w, "{}", row.to_csv_line())?;
        }
        w.flush()?;
    }
    Ok(rows)
}
