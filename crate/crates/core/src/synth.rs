//! Random low-rank model generators and the diagnostics used to
//! characterize them: coherence, spikiness, relative error and per-mode
//! subspace errors.

use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamRng};
use crate::spectra::{singular_values, subspace_distance, Basis, FactorSet};
use crate::tensor::{Matrix, Tensor};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Relative cutoff deciding the numerical rank of a flattening when a
/// tensor's coherence is computed from its thin SVDs.
const THIN_RANK_REL_EPS: f64 = 1e-10;

/// Families of synthetic low-rank tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Random orthonormal factors with an iid Gaussian core.
    Tucker,
    /// `sum_i scale * u_i^(1) ⊗ ... ⊗ u_i^(k)` with per-mode orthonormal
    /// columns; every flattening has all singular values equal to
    /// `scale`.
    CpOrtho,
    /// Symmetric `sum_i u_i ⊗ ... ⊗ u_i` with iid standard Gaussian
    /// vectors `u_i`.
    CpSymGauss,
}

/// Specification of one synthetic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub dims: Vec<usize>,
    /// Per-mode ranks; the CP kinds use a common `r` and expect all
    /// entries equal.
    pub ranks: Vec<usize>,
    /// Scale of each rank-one term for the CP kinds; defaults to
    /// `sqrt(d_1...d_k)` (i.e. `d^{k/2}` for cubic shapes).
    pub scale: Option<f64>,
    pub seed: u64,
}

impl ModelSpec {
    pub fn cp_ortho(d: usize, k: usize, r: usize, scale: Option<f64>, seed: u64) -> Self {
        ModelSpec {
            kind: ModelKind::CpOrtho,
            dims: vec![d; k],
            ranks: vec![r; k],
            scale,
            seed,
        }
    }

    pub fn cp_sym_gauss(d: usize, k: usize, r: usize, seed: u64) -> Self {
        ModelSpec {
            kind: ModelKind::CpSymGauss,
            dims: vec![d; k],
            ranks: vec![r; k],
            scale: None,
            seed,
        }
    }

    pub fn tucker(dims: Vec<usize>, ranks: Vec<usize>, seed: u64) -> Self {
        ModelSpec {
            kind: ModelKind::Tucker,
            dims,
            ranks,
            scale: None,
            seed,
        }
    }

    fn validate(&self) -> Result<usize> {
        if self.dims.len() < 2 || self.dims.len() != self.ranks.len() {
            return Err(Error::InvalidArgument(format!(
                "bad model shape: dims {:?}, ranks {:?}",
                self.dims, self.ranks
            )));
        }
        for (&r, &d) in self.ranks.iter().zip(&self.dims) {
            if r == 0 || r > d {
                return Err(Error::InvalidArgument(format!(
                    "rank {r} out of range for extent {d}"
                )));
            }
        }
        let r = self.ranks[0];
        match self.kind {
            ModelKind::Tucker => {}
            ModelKind::CpOrtho | ModelKind::CpSymGauss => {
                if self.ranks.iter().any(|&x| x != r) {
                    return Err(Error::InvalidArgument(
                        "CP models use one common rank across modes".into(),
                    ));
                }
                if let Some(s) = self.scale {
                    if !s.is_finite() || s <= 0.0 {
                        return Err(Error::InvalidArgument(format!(
                            "scale must be positive, got {s}"
                        )));
                    }
                }
                if self.kind == ModelKind::CpSymGauss
                    && self.dims.iter().any(|&d| d != self.dims[0])
                {
                    return Err(Error::InvalidArgument(
                        "symmetric model needs a cubic shape".into(),
                    ));
                }
            }
        }
        Ok(r)
    }
}

/// Haar-distributed `d x r` orthonormal basis: QR of a standard
/// Gaussian matrix with the R diagonal made positive.
pub fn random_orthonormal<R: Rng>(d: usize, r: usize, rng: &mut R) -> Result<Basis> {
    if r == 0 || r > d {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {r} orthonormal columns in dimension {d}"
        )));
    }
    let g = DMatrix::<f64>::from_fn(d, r, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let rmat = qr.r();
    for c in 0..r {
        if rmat[(c, c)] < 0.0 {
            for i in 0..d {
                q[(i, c)] = -q[(i, c)];
            }
        }
    }
    let mut cols = Matrix::zeros(d, r);
    for i in 0..d {
        for c in 0..r {
            cols.set(i, c, q[(i, c)]);
        }
    }
    Basis::new(cols)
}

/// Generates the instance described by `spec` with a generator seeded
/// from `spec.seed`. Returns the tensor and the exact per-mode factor
/// subspaces.
pub fn generate(spec: &ModelSpec) -> Result<(Tensor, FactorSet)> {
    let mut rng = stream_rng(spec.seed, 0);
    generate_with(spec, &mut rng)
}

/// Same as [`generate`] but drawing from a caller-owned stream (the
/// `spec.seed` field is ignored).
pub fn generate_with(spec: &ModelSpec, rng: &mut StreamRng) -> Result<(Tensor, FactorSet)> {
    let r = spec.validate()?;
    match spec.kind {
        ModelKind::Tucker => {
            let factors: Vec<Basis> = spec
                .dims
                .iter()
                .zip(&spec.ranks)
                .map(|(&d, &rj)| random_orthonormal(d, rj, rng))
                .collect::<Result<_>>()?;
            let core_len: usize = spec.ranks.iter().product();
            let core_vals: Vec<f64> = (0..core_len).map(|_| StandardNormal.sample(rng)).collect();
            let mut t = Tensor::new(spec.ranks.clone(), core_vals)?;
            for (j, f) in factors.iter().enumerate() {
                t = t.mode_multiply(j, &f.columns().transpose())?;
            }
            Ok((t, FactorSet::new(factors)?))
        }
        ModelKind::CpOrtho => {
            let total: f64 = spec.dims.iter().map(|&d| d as f64).product();
            let scale = spec.scale.unwrap_or_else(|| total.sqrt());
            let factors: Vec<Basis> = spec
                .dims
                .iter()
                .map(|&d| random_orthonormal(d, r, rng))
                .collect::<Result<_>>()?;
            let mut t = Tensor::zeros(spec.dims.clone())?;
            for i in 0..r {
                let vecs: Vec<Vec<f64>> = factors.iter().map(|f| f.column(i)).collect();
                let term = Tensor::outer_product(&vecs)?;
                t = t.add(&term.scaled(scale))?;
            }
            Ok((t, FactorSet::new(factors)?))
        }
        ModelKind::CpSymGauss => {
            let d = spec.dims[0];
            let k = spec.dims.len();
            let scale = spec.scale.unwrap_or(1.0);
            let us: Vec<Vec<f64>> = (0..r)
                .map(|_| (0..d).map(|_| StandardNormal.sample(rng)).collect())
                .collect();
            let mut t = Tensor::zeros(spec.dims.clone())?;
            for u in &us {
                let vecs: Vec<Vec<f64>> = (0..k).map(|_| u.clone()).collect();
                let term = Tensor::outer_product(&vecs)?;
                t = t.add(&term.scaled(scale))?;
            }
            // exact mode subspace: orthonormalized span of the u_i
            let mut stacked = Matrix::zeros(d, r);
            for (c, u) in us.iter().enumerate() {
                for (i, &v) in u.iter().enumerate() {
                    stacked.set(i, c, v);
                }
            }
            let qr = crate::spectra::to_na(&stacked).qr();
            let q = qr.q();
            let mut cols = Matrix::zeros(d, r);
            for i in 0..d {
                for c in 0..r {
                    cols.set(i, c, q[(i, c)]);
                }
            }
            let span = Basis::new(cols)?;
            let factors = vec![span; k];
            Ok((t, FactorSet::new(factors)?))
        }
    }
}

/// Coherence `μ(U) = (d/r) max_i ‖U_{i·}‖²` of an orthonormal basis;
/// always in `[1, d/r]`.
pub fn coherence(u: &Basis) -> f64 {
    let d = u.dim();
    let r = u.rank();
    let mut max_row = 0.0f64;
    for i in 0..d {
        let mut s = 0.0;
        for c in 0..r {
            let v = u.columns().get(i, c);
            s += v * v;
        }
        max_row = max_row.max(s);
    }
    (d as f64 / r as f64) * max_row
}

/// Coherence of a tensor: the max coherence over the thin left singular
/// bases of its flattenings, with numerical rank cut at
/// `1e-10 * sigma_max` per mode.
pub fn tensor_coherence(a: &Tensor) -> Result<f64> {
    let mut mu = 0.0f64;
    for j in 0..a.order() {
        let m = a.matricize(j)?;
        let sigma = singular_values(&m)?;
        let smax = sigma[0];
        if smax <= 0.0 {
            return Err(Error::InvalidArgument(
                "coherence of the zero tensor".into(),
            ));
        }
        let rank = sigma
            .iter()
            .take_while(|&&s| s > THIN_RANK_REL_EPS * smax)
            .count();
        let u = crate::spectra::top_left_singular_vectors(&m, rank)?;
        mu = mu.max(coherence(&u));
    }
    Ok(mu)
}

/// Spikiness `β(A) = sqrt(d_1...d_k) ‖A‖_∞ / ‖A‖_2`; 1 for flat
/// tensors, `sqrt(d_1...d_k)` for a single spike.
pub fn spikiness(a: &Tensor) -> Result<f64> {
    let l2 = a.l2_norm();
    if l2 == 0.0 {
        return Err(Error::InvalidArgument(
            "spikiness of the zero tensor".into(),
        ));
    }
    let total: f64 = a.dims().iter().map(|&d| d as f64).product();
    Ok(total.sqrt() * a.max_abs() / l2)
}

/// `ε(T̂) = ‖T̂ - T‖_2 / ‖T‖_2`.
pub fn relative_error(t_hat: &Tensor, t_true: &Tensor) -> Result<f64> {
    let denom = t_true.l2_norm();
    if denom == 0.0 {
        return Err(Error::InvalidArgument(
            "relative error against the zero tensor".into(),
        ));
    }
    Ok(t_hat.sub(t_true)?.l2_norm() / denom)
}

/// Per-mode projector distances between estimated and true factors.
pub fn subspace_error(est: &FactorSet, truth: &FactorSet) -> Result<Vec<f64>> {
    if est.order() != truth.order() {
        return Err(Error::ShapeMismatch(format!(
            "factor sets of order {} vs {}",
            est.order(),
            truth.order()
        )));
    }
    (0..est.order())
        .map(|j| subspace_distance(est.factor(j), truth.factor(j)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::mode_spectrum;
    use approx::assert_abs_diff_eq;

    #[test]
    fn random_orthonormal_is_orthonormal() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..5 {
            let b = random_orthonormal(8, 3, &mut rng).unwrap();
            // Basis::new already validates the gram; spot-check one entry.
            let c0 = b.column(0);
            let n: f64 = c0.iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-10);
        }
        assert!(random_orthonormal(3, 4, &mut rng).is_err());
    }

    #[test]
    fn random_orthonormal_square_has_unit_det() {
        let mut rng = stream_rng(2, 0);
        let b = random_orthonormal(5, 5, &mut rng).unwrap();
        let det = crate::spectra::to_na(b.columns()).determinant();
        assert_abs_diff_eq!(det.abs(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn random_orthonormal_first_column_centered() {
        // Haar symmetry: the mean of the first column over many draws is
        // near zero coordinatewise.
        let d = 4;
        let reps = 10_000;
        let mut rng = stream_rng(3, 0);
        let mut mean = vec![0.0f64; d];
        for _ in 0..reps {
            let b = random_orthonormal(d, 2, &mut rng).unwrap();
            for (m, v) in mean.iter_mut().zip(b.column(0)) {
                *m += v;
            }
        }
        for m in &mean {
            let avg = m / reps as f64;
            assert!(avg.abs() < 5.0 / (reps as f64).sqrt(), "column mean {avg}");
        }
    }

    #[test]
    fn cp_ortho_flat_spectrum() {
        let d = 20;
        let spec = ModelSpec::cp_ortho(d, 3, 4, None, 17);
        let (t, truth) = generate(&spec).unwrap();
        let lam = ((d * d * d) as f64).sqrt();
        let s = mode_spectrum(&t, &[4, 4, 4]).unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(s.sigma_max[j], lam, epsilon = 1e-8 * lam);
            assert_abs_diff_eq!(s.sigma_min[j], lam, epsilon = 1e-8 * lam);
        }
        assert_abs_diff_eq!(s.kappa, 1.0, epsilon = 1e-10);
        assert_eq!(truth.ranks(), vec![4, 4, 4]);
        // rank-5 request must fail: the tensor has multilinear ranks 4
        assert!(mode_spectrum(&t, &[5, 5, 5]).is_err());
    }

    #[test]
    fn cp_ortho_rank_one() {
        let spec = ModelSpec::cp_ortho(6, 3, 1, Some(3.0), 5);
        let (t, _) = generate(&spec).unwrap();
        for j in 0..3 {
            let sigma = singular_values(&t.matricize(j).unwrap()).unwrap();
            assert_abs_diff_eq!(sigma[0], 3.0, epsilon = 1e-10);
            assert!(sigma[1] < 1e-10);
        }
    }

    #[test]
    fn cp_sym_gauss_l2_scaling() {
        // ‖T‖_2^2 scales like r * d^k. The exact finite-d mean is
        // r * E(chi^2_d)^3 = r * d(d+2)(d+4) (cross terms have odd
        // Gaussian moments and vanish); compare the Monte-Carlo mean
        // against it with the 25% band.
        let d = 30usize;
        let r = 2usize;
        let k = 3usize;
        let exact_mean = r as f64 * (d * (d + 2) * (d + 4)) as f64;
        let mut ratios = Vec::new();
        for seed in 0..20 {
            let spec = ModelSpec::cp_sym_gauss(d, k, r, seed);
            let (t, _) = generate(&spec).unwrap();
            ratios.push(t.l2_norm().powi(2) / exact_mean);
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((mean - 1.0).abs() < 0.25, "mean ratio {mean}");
        // and the asymptotic display r * d^k is right to within a factor of 2
        let asym = exact_mean / (r as f64 * (d as f64).powi(k as i32));
        assert!(asym < 2.0 && asym > 0.5);
    }

    #[test]
    fn coherence_examples() {
        // first 2 columns of I_6: mu = d/r = 3
        let mut m = Matrix::zeros(6, 2);
        m.set(0, 0, 1.0);
        m.set(1, 1, 1.0);
        let b = Basis::new(m).unwrap();
        assert_abs_diff_eq!(coherence(&b), 3.0, epsilon = 1e-12);
        // flat single column: mu = 1
        let m = Matrix::new(4, 1, vec![0.5; 4]).unwrap();
        let b = Basis::new(m).unwrap();
        assert_abs_diff_eq!(coherence(&b), 1.0, epsilon = 1e-12);
        // random orthonormal stays within [1, d/r]
        let mut rng = stream_rng(9, 0);
        let b = random_orthonormal(50, 5, &mut rng).unwrap();
        let mu = coherence(&b);
        assert!((1.0..=10.0).contains(&mu), "mu {mu}");
    }

    #[test]
    fn spikiness_examples() {
        let ones = Tensor::new(vec![2, 3, 2], vec![1.0; 12]).unwrap();
        assert_abs_diff_eq!(spikiness(&ones).unwrap(), 1.0, epsilon = 1e-12);
        use crate::tensor::MultiIndex;
        let e = Tensor::basis(vec![2, 3, 2], &MultiIndex::new(vec![1, 0, 1])).unwrap();
        assert_abs_diff_eq!(spikiness(&e).unwrap(), 12f64.sqrt(), epsilon = 1e-12);
        assert!(spikiness(&Tensor::zeros(vec![2, 2]).unwrap()).is_err());
    }

    #[test]
    fn diagnostics_scale_invariant() {
        let spec = ModelSpec::tucker(vec![8, 7, 6], vec![2, 2, 2], 23);
        let (t, _) = generate(&spec).unwrap();
        let t3 = t.scaled(3.0);
        assert_abs_diff_eq!(
            spikiness(&t).unwrap(),
            spikiness(&t3).unwrap(),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            tensor_coherence(&t).unwrap(),
            tensor_coherence(&t3).unwrap(),
            epsilon = 1e-8
        );
    }

    #[test]
    fn relative_error_examples() {
        let spec = ModelSpec::tucker(vec![5, 5, 5], vec![2, 2, 2], 3);
        let (t, _) = generate(&spec).unwrap();
        assert_eq!(relative_error(&t, &t).unwrap(), 0.0);
        let zero = Tensor::zeros(t.dims().to_vec()).unwrap();
        assert_abs_diff_eq!(relative_error(&zero, &t).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            relative_error(&t.scaled(1.1), &t).unwrap(),
            0.1,
            epsilon = 1e-12
        );
        assert!(relative_error(&t, &zero).is_err());
    }

    #[test]
    fn generate_rejects_bad_specs() {
        assert!(generate(&ModelSpec::cp_ortho(4, 3, 5, None, 0)).is_err());
        assert!(generate(&ModelSpec::cp_ortho(4, 3, 2, Some(-1.0), 0)).is_err());
        let mut spec = ModelSpec::cp_sym_gauss(4, 3, 2, 0);
        spec.dims = vec![4, 5, 4];
        assert!(generate(&spec).is_err());
    }
}
