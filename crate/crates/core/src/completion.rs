//! The completion estimators: thresholded spectral initialization from
//! the U-statistic second moments, an HOSVD baseline initialization,
//! higher-order orthogonal (power) iterations, and the end-to-end
//! pipeline that composes them.
//!
//! One power sweep updates the modes in ascending order; the update for
//! mode `j` takes the first `r_j` left singular vectors of
//! `M_j(t0 contracted with the current factors of every other mode)`,
//! using this sweep's factors for modes before `j` and the previous
//! sweep's for modes after. The returned estimate is the multilinear
//! projection of `t0` onto the final factors.

use crate::error::{Error, Result};
use crate::obs::{n_hat, t_init, Dataset};
use crate::spectra::{
    eigvecs_above, subspace_distance, top_eigenvectors, top_left_singular_vectors, Basis, FactorSet,
};
use crate::tensor::{project_multilinear, Matrix, Tensor};

/// Default stopping tolerance on the per-sweep max subspace change.
pub const DEFAULT_STOP_TOL: f64 = 1e-8;

/// Initialization strategy for the factor subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    /// Thresholded eigenvectors of the U-statistic second moments.
    Spectral,
    /// Truncated SVD of the flattenings of the unbiased estimate.
    Hosvd,
}

/// Threshold selection for the spectral initialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaMode {
    /// Plug-in evaluation of [`default_lambda`] from the observed values.
    Auto,
    /// A fixed threshold; `Fixed(0.0)` keeps the top eigenvectors up to
    /// the target rank.
    Fixed(f64),
}

/// Parameters of one completion run.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionConfig {
    /// Per-mode target ranks `r_j`.
    pub ranks: Vec<usize>,
    /// Number of power sweeps; 0 projects onto the initialization only.
    pub iter_max: usize,
    pub lambda: LambdaMode,
    /// Early-stop tolerance on the per-sweep max subspace change.
    pub stop_tol: f64,
    pub init_method: InitMethod,
}

impl CompletionConfig {
    pub fn new(ranks: Vec<usize>) -> Self {
        CompletionConfig {
            ranks,
            iter_max: 10,
            lambda: LambdaMode::Auto,
            stop_tol: DEFAULT_STOP_TOL,
            init_method: InitMethod::Spectral,
        }
    }

    fn validate(&self, dims: &[usize]) -> Result<()> {
        if self.ranks.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} ranks for order-{} data",
                self.ranks.len(),
                dims.len()
            )));
        }
        for (j, (&r, &d)) in self.ranks.iter().zip(dims).enumerate() {
            if r == 0 || r > d {
                return Err(Error::InvalidArgument(format!(
                    "rank {r} invalid for mode {j} of extent {d}"
                )));
            }
        }
        if !self.stop_tol.is_finite() || self.stop_tol < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "stop tolerance must be nonnegative, got {}",
                self.stop_tol
            )));
        }
        if let LambdaMode::Fixed(v) = self.lambda {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "lambda must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// A completed tensor with its factors and run diagnostics.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub t_hat: Tensor,
    pub factors: FactorSet,
    /// Max per-mode subspace change after each sweep, as observed.
    pub trace: Vec<f64>,
    pub lambda_used: f64,
    /// Factor widths actually used per mode after threshold selection,
    /// clamping and fallback.
    pub init_ranks_selected: Vec<usize>,
}

/// Number of sweeps after which power iteration is stopped by default.
pub fn default_iter_max(dims: &[usize]) -> usize {
    let dmax = dims.iter().copied().max().unwrap_or(2) as f64;
    10usize.max((4.0 * dmax.ln()).ceil() as usize)
}

/// The threshold
/// `λ = γ α^{3/2} (‖T‖_∞ ∨ σ) log^{k+2}(d_max) (κ r_max^{(k-2)/2}
/// sqrt(d_max Πd / n) + (Πd)^{3/4} / n^{1/2} + r_max^{(k-2)/2} Πd / n)`,
/// with natural logs.
pub fn default_lambda(
    linf_or_sigma: f64,
    kappa: f64,
    r_max: usize,
    dims: &[usize],
    n: usize,
    gamma: f64,
    alpha: f64,
) -> Result<f64> {
    if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidArgument(format!("bad dims {dims:?}")));
    }
    if n == 0 || r_max == 0 {
        return Err(Error::InvalidArgument(
            "n and r_max must be positive".into(),
        ));
    }
    for (name, v) in [
        ("linf_or_sigma", linf_or_sigma),
        ("kappa", kappa),
        ("gamma", gamma),
        ("alpha", alpha),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let k = dims.len() as f64;
    let d_max = dims.iter().copied().max().expect("nonempty dims") as f64;
    let total: f64 = dims.iter().map(|&d| d as f64).product();
    let nf = n as f64;
    let r = r_max as f64;
    let r_pow = r.powf((k - 2.0) / 2.0);
    let log_pow = d_max.ln().powf(k + 2.0);
    let term1 = kappa * r_pow * (d_max * total / nf).sqrt();
    let term2 = total.powf(0.75) / nf.sqrt();
    let term3 = r_pow * total / nf;
    Ok(gamma * alpha.powf(1.5) * linf_or_sigma * log_pow * (term1 + term2 + term3))
}

fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Plug-in threshold from the observed values alone: `‖T‖_∞` estimated
/// by `max |y|`, `σ` by the scaled median absolute deviation, and
/// `κ = γ = α = 1`.
pub fn auto_lambda(data: &Dataset, r_max: usize) -> Result<f64> {
    let mut ys: Vec<f64> = data.ys().collect();
    let med = median_in_place(&mut ys);
    let mut dev: Vec<f64> = ys.iter().map(|y| (y - med).abs()).collect();
    let mad = median_in_place(&mut dev);
    let sigma_hat = 1.4826 * mad;
    let linf_hat = data.ys().fold(0.0f64, |m, y| m.max(y.abs()));
    let scale = linf_hat.max(sigma_hat).max(f64::MIN_POSITIVE);
    default_lambda(scale, 1.0, r_max, data.dims(), data.len(), 1.0, 1.0)
}

/// Per-mode thresholded eigenvectors of the U-statistic second moments.
/// Selections wider than `r_j` are clamped to the top `r_j`; an empty
/// selection falls back to the top eigenvector. Returns the factors and
/// the widths actually kept.
pub fn spectral_init(
    data: &Dataset,
    lambda: f64,
    ranks: &[usize],
) -> Result<(FactorSet, Vec<usize>)> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    let dims = data.dims();
    if ranks.len() != dims.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} ranks for order-{} data",
            ranks.len(),
            dims.len()
        )));
    }
    let mut factors = Vec::with_capacity(dims.len());
    let mut counts = Vec::with_capacity(dims.len());
    for (j, &r) in ranks.iter().enumerate() {
        let second_moment = n_hat(data, j)?;
        let basis = match eigvecs_above(&second_moment, lambda * lambda)? {
            Some(b) if b.rank() > r => b.truncated(r)?,
            Some(b) => b,
            None => top_eigenvectors(&second_moment, 1)?,
        };
        counts.push(basis.rank());
        factors.push(basis);
    }
    Ok((FactorSet::new(factors)?, counts))
}

/// HOSVD initialization: factor `j` is the top-`r_j` left singular
/// basis of `M_j(t0)`.
pub fn hosvd_init(t0: &Tensor, ranks: &[usize]) -> Result<FactorSet> {
    if ranks.len() != t0.order() {
        return Err(Error::ShapeMismatch(format!(
            "{} ranks for order-{} tensor",
            ranks.len(),
            t0.order()
        )));
    }
    let mut factors = Vec::with_capacity(t0.order());
    for (j, &r) in ranks.iter().enumerate() {
        let m = t0.matricize(j)?;
        factors.push(top_left_singular_vectors(&m, r)?);
    }
    FactorSet::new(factors)
}

/// Appends `cand` to `cols` after orthogonalizing against the current
/// columns (modified Gram-Schmidt, one reorthogonalization pass).
/// Returns false when the residual is negligible.
fn try_append_orthogonal(cols: &mut Vec<Vec<f64>>, cand: &[f64]) -> bool {
    let mut v = cand.to_vec();
    for _ in 0..2 {
        for col in cols.iter() {
            let dot: f64 = v.iter().zip(col).map(|(a, b)| a * b).sum();
            for (vi, ci) in v.iter_mut().zip(col) {
                *vi -= dot * ci;
            }
        }
    }
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-8 {
        return false;
    }
    for vi in v.iter_mut() {
        *vi /= norm;
    }
    cols.push(v);
    true
}

/// Widens each factor to exactly `r_j` columns. Padding directions come
/// from the HOSVD factors of `t0` orthogonalized against the selection,
/// then coordinate vectors if those run out.
fn pad_factors(t0: &Tensor, init: &FactorSet, ranks: &[usize]) -> Result<FactorSet> {
    let mut padded = Vec::with_capacity(ranks.len());
    for (j, &r) in ranks.iter().enumerate() {
        let f = init.factor(j);
        let d = t0.dims()[j];
        if f.dim() != d {
            return Err(Error::ShapeMismatch(format!(
                "factor {j} ambient dim {} vs mode extent {d}",
                f.dim()
            )));
        }
        if f.rank() > r {
            return Err(Error::InvalidArgument(format!(
                "factor {j} has {} columns, more than target rank {r}",
                f.rank()
            )));
        }
        if f.rank() == r {
            padded.push(f.clone());
            continue;
        }
        let mut cols: Vec<Vec<f64>> = (0..f.rank()).map(|c| f.column(c)).collect();
        let flat = t0.matricize(j)?;
        let hosvd = top_left_singular_vectors(&flat, r.min(flat.cols()))?;
        let mut c = 0;
        while cols.len() < r && c < hosvd.rank() {
            try_append_orthogonal(&mut cols, &hosvd.column(c));
            c += 1;
        }
        let mut i = 0;
        while cols.len() < r && i < d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            try_append_orthogonal(&mut cols, &e);
            i += 1;
        }
        if cols.len() < r {
            return Err(Error::RankDeficient(format!(
                "cannot pad factor {j} to rank {r}"
            )));
        }
        let mut m = Matrix::zeros(d, r);
        for (ci, col) in cols.iter().enumerate() {
            for (ri, &v) in col.iter().enumerate() {
                m.set(ri, ci, v);
            }
        }
        padded.push(Basis::new(m)?);
    }
    FactorSet::new(padded)
}

/// Runs up to `iter_max` power sweeps from `init` and projects `t0`
/// onto the final factors. Factors narrower than the target ranks are
/// padded first. Returns the factors, the projection, and the per-sweep
/// max subspace change; sweeps stop early once that change drops below
/// `stop_tol`.
pub fn power_iterations(
    t0: &Tensor,
    init: &FactorSet,
    ranks: &[usize],
    iter_max: usize,
    stop_tol: f64,
) -> Result<(FactorSet, Tensor, Vec<f64>)> {
    let k = t0.order();
    if ranks.len() != k || init.order() != k {
        return Err(Error::ShapeMismatch(format!(
            "order mismatch: tensor {k}, {} ranks, {} factors",
            ranks.len(),
            init.order()
        )));
    }
    for (j, &r) in ranks.iter().enumerate() {
        if r == 0 || r > t0.dims()[j] {
            return Err(Error::InvalidArgument(format!(
                "rank {r} invalid for mode {j} of extent {}",
                t0.dims()[j]
            )));
        }
    }
    let mut factors = pad_factors(t0, init, ranks)?;
    let mut trace = Vec::new();
    for _sweep in 0..iter_max {
        let prev = factors.clone();
        for j in 0..k {
            // Contract every other mode with its current factor; modes
            // before j were already updated this sweep.
            let mut contracted: Option<Tensor> = None;
            for jp in 0..k {
                if jp == j {
                    continue;
                }
                let u = factors.factor(jp).columns();
                let next = match &contracted {
                    Some(t) => t.mode_multiply(jp, u)?,
                    None => t0.mode_multiply(jp, u)?,
                };
                contracted = Some(next);
            }
            let m = contracted.expect("k >= 2").matricize(j)?;
            let updated = top_left_singular_vectors(&m, ranks[j])?;
            let mut fs = factors.factors().to_vec();
            fs[j] = updated;
            factors = FactorSet::new(fs)?;
        }
        let mut change = 0.0f64;
        for j in 0..k {
            change = change.max(subspace_distance(factors.factor(j), prev.factor(j))?);
        }
        trace.push(change);
        if change < stop_tol {
            break;
        }
    }
    let t_hat = project_multilinear(t0, &factors)?;
    Ok((factors, t_hat, trace))
}

/// End-to-end pipeline: unbiased dense estimate, factor initialization,
/// power sweeps, multilinear projection.
pub fn complete(data: &Dataset, config: &CompletionConfig) -> Result<Estimate> {
    config.validate(data.dims())?;
    let t0 = t_init(data);
    let r_max = config
        .ranks
        .iter()
        .copied()
        .max()
        .expect("validated nonempty");
    let lambda_used = match config.lambda {
        LambdaMode::Fixed(v) => v,
        LambdaMode::Auto => auto_lambda(data, r_max)?,
    };
    let (init, counts) = match config.init_method {
        InitMethod::Spectral => {
            if data.len() < 2 {
                return Err(Error::InvalidArgument(
                    "spectral initialization needs n >= 2".into(),
                ));
            }
            spectral_init(data, lambda_used, &config.ranks)?
        }
        InitMethod::Hosvd => {
            let f = hosvd_init(&t0, &config.ranks)?;
            let counts = f.ranks();
            (f, counts)
        }
    };
    let (factors, t_hat, trace) =
        power_iterations(&t0, &init, &config.ranks, config.iter_max, config.stop_tol)?;
    Ok(Estimate {
        t_hat,
        factors,
        trace,
        lambda_used,
        init_ranks_selected: counts,
    })
}
