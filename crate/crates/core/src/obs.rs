//! The observation model: uniform-with-replacement sampling of noisy
//! entries, the inverse-probability-weighted estimate of the full
//! tensor, and the U-statistic estimate of each mode's second-moment
//! matrix.
//!
//! With observations `(Y_i, omega_i)` where `Y = T(omega) + xi`:
//!
//! - `t_init` is `(d_1...d_k / n) * sum_i Y_i e_{omega_i}`, unbiased
//!   for `T` under uniform sampling.
//! - `n_hat(j)` is the U-statistic
//!   `(d_1...d_k)^2 / (n(n-1)) * sum_{i != i'} Y_i Y_{i'}
//!    M_j(e_{omega_i}) M_j(e_{omega_{i'}})^T`,
//!   unbiased for `N_j = M_j(T) M_j(T)^T`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::tensor::{index_iter, Matrix, MultiIndex, Tensor};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Gaussian noise level for the sampling model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    sigma: f64,
}

impl NoiseSpec {
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be finite and nonnegative, got {sigma}"
            )));
        }
        Ok(NoiseSpec { sigma })
    }

    pub fn noiseless() -> Self {
        NoiseSpec { sigma: 0.0 }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Observations `(omega_i, y_i)` over a fixed ambient shape. Duplicate
/// positions are permitted: sampling is with replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dims: Vec<usize>,
    obs: Vec<(MultiIndex, f64)>,
}

impl Dataset {
    pub fn new(dims: Vec<usize>, obs: Vec<(MultiIndex, f64)>) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!("bad ambient dims {dims:?}")));
        }
        if obs.is_empty() {
            return Err(Error::InvalidArgument(
                "dataset needs at least one observation".into(),
            ));
        }
        for (omega, y) in &obs {
            omega.check_in(&dims)?;
            if !y.is_finite() {
                return Err(Error::NonFinite(format!("observation value {y}")));
            }
        }
        Ok(Dataset { dims, obs })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Sample size n.
    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn obs(&self) -> &[(MultiIndex, f64)] {
        &self.obs
    }

    /// Observed values only.
    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.obs.iter().map(|(_, y)| *y)
    }
}

/// Draws `n` iid observations: positions uniform with replacement over
/// all index tuples, values `T(omega) + N(0, sigma^2)`.
pub fn sample_dataset<R: Rng>(
    t: &Tensor,
    n: usize,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample size must be at least 1".into(),
        ));
    }
    let normal = if noise.sigma() > 0.0 {
        Some(Normal::new(0.0, noise.sigma()).expect("valid sigma"))
    } else {
        None
    };
    let mut obs = Vec::with_capacity(n);
    for _ in 0..n {
        let coords: Vec<usize> = t.dims().iter().map(|&d| rng.random_range(0..d)).collect();
        let mut y = t.entry(&coords);
        if let Some(normal) = &normal {
            y += normal.sample(rng);
        }
        obs.push((MultiIndex::new(coords), y));
    }
    Dataset::new(t.dims().to_vec(), obs)
}

/// One noiseless observation per entry, in storage order.
pub fn full_dataset(t: &Tensor) -> Dataset {
    let obs: Vec<(MultiIndex, f64)> = index_iter(t.dims())
        .map(|coords| {
            let y = t.entry(&coords);
            (MultiIndex::new(coords), y)
        })
        .collect();
    Dataset {
        dims: t.dims().to_vec(),
        obs,
    }
}

/// The unbiased inverse-probability-weighted estimate
/// `(d_1...d_k / n) * sum_i Y_i e_{omega_i}`. Duplicate positions sum.
pub fn t_init(data: &Dataset) -> Tensor {
    let mut acc = Tensor::zeros(data.dims().to_vec()).expect("dataset dims are valid");
    for (omega, y) in data.obs() {
        let lin = acc.linear_index(omega.coords());
        acc.values_mut()[lin] += *y;
    }
    let total: f64 = data.dims().iter().map(|&d| d as f64).product();
    let scale = total / data.len() as f64;
    for v in acc.values_mut() {
        *v *= scale;
    }
    acc
}

/// Column index of `omega` in the mode-`mode` flattening.
fn flattening_column(dims: &[usize], coords: &[usize], mode: usize) -> usize {
    let mut col = 0usize;
    for (j, (&c, &d)) in coords.iter().zip(dims).enumerate() {
        if j == mode {
            continue;
        }
        col = col * d + c;
    }
    col
}

/// The U-statistic estimate of `N_j = M_j(T) M_j(T)^T`.
///
/// Because `M_j(e_omega) M_j(e_omega')^T` vanishes unless the two
/// positions agree on every coordinate except mode `j`, the pairwise
/// sum collapses to a per-column grouping: with `S_g = sum_{i in g}
/// y_i e_{a_i}` over each column group `g`,
/// `n_hat = c * sum_g (S_g S_g^T - sum_{i in g} y_i^2 e_{a_i} e_{a_i}^T)`.
/// The output is exactly symmetric by construction.
pub fn n_hat(data: &Dataset, mode: usize) -> Result<Matrix> {
    let dims = data.dims();
    if mode >= dims.len() {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for order {}",
            dims.len()
        )));
    }
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "U-statistic needs n >= 2 observations, got {n}"
        )));
    }
    let dj = dims[mode];
    // groups keyed by flattening column; per group, per-coordinate sums
    // of y and of y^2 (BTreeMaps keep accumulation order canonical).
    let mut groups: BTreeMap<usize, BTreeMap<usize, (f64, f64)>> = BTreeMap::new();
    for (omega, y) in data.obs() {
        let col = flattening_column(dims, omega.coords(), mode);
        let a = omega.coords()[mode];
        let entry = groups
            .entry(col)
            .or_default()
            .entry(a)
            .or_insert((0.0, 0.0));
        entry.0 += *y;
        entry.1 += *y * *y;
    }
    let mut acc = Matrix::zeros(dj, dj);
    for coords in groups.values() {
        for (&a, &(sa, s2a)) in coords {
            for (&b, &(sb, _)) in coords {
                let v = acc.get(a, b) + sa * sb;
                acc.set(a, b, v);
            }
            let v = acc.get(a, a) - s2a;
            acc.set(a, a, v);
        }
    }
    let total: f64 = dims.iter().map(|&d| d as f64).product();
    let c = total * total / (n as f64 * (n as f64 - 1.0));
    Ok(acc.scaled(c))
}

/// The exact second-moment matrix `N_j = M_j(T) M_j(T)^T`.
pub fn n_exact(t: &Tensor, mode: usize) -> Result<Matrix> {
    let m = t.matricize(mode)?;
    let dj = m.rows();
    let mut g = Matrix::zeros(dj, dj);
    for a in 0..dj {
        for b in a..dj {
            let dot: f64 = m.row(a).iter().zip(m.row(b)).map(|(x, y)| x * y).sum();
            g.set(a, b, dot);
            g.set(b, a, dot);
        }
    }
    Ok(g)
}
