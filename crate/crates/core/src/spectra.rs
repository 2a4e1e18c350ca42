//! Dense spectral linear algebra for the completion pipeline: truncated
//! left singular bases, thresholded symmetric eigendecompositions,
//! projector-based subspace distances and per-mode singular value
//! extremes.
//!
//! Everything here is deterministic: identical input bits produce
//! identical output bits. Truncated bases carry a fixed sign convention
//! (the largest-magnitude entry of each column is positive, earliest
//! index winning ties) so frozen test expectations stay stable.
//!
//! Singular value decompositions use cyclic one-sided Jacobi rotations
//! accumulated on the short side of the matrix. Jacobi keeps full
//! accuracy on rank-deficient inputs, which the pipeline produces
//! whenever a contracted tensor is exactly low rank.

use crate::error::{Error, Result};
use crate::tensor::{Matrix, Tensor};
use nalgebra::DMatrix;

/// Orthonormality tolerance enforced on [`Basis`] construction.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Symmetry tolerance accepted by [`eigvecs_above`], relative to the
/// matrix magnitude.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Singular values below this are treated as zero by [`mode_spectrum`].
pub const RANK_EPS: f64 = 1e-12;

const SVD_MAX_ITER: usize = 10_000;

/// A `dim x r` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    columns: Matrix,
}

impl Basis {
    /// Validates orthonormality (`U^T U == I` to [`ORTHONORMAL_TOL`]).
    pub fn new(columns: Matrix) -> Result<Self> {
        if columns.cols() > columns.rows() {
            return Err(Error::InvalidArgument(format!(
                "basis cannot have more columns ({}) than rows ({})",
                columns.cols(),
                columns.rows()
            )));
        }
        let r = columns.cols();
        for a in 0..r {
            for b in a..r {
                let mut dot = 0.0;
                for i in 0..columns.rows() {
                    dot += columns.get(i, a) * columns.get(i, b);
                }
                let target = if a == b { 1.0 } else { 0.0 };
                if (dot - target).abs() > ORTHONORMAL_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "columns {a},{b} not orthonormal: gram entry {dot}"
                    )));
                }
            }
        }
        Ok(Basis { columns })
    }

    /// Ambient dimension (row count).
    pub fn dim(&self) -> usize {
        self.columns.rows()
    }

    /// Number of columns r.
    pub fn rank(&self) -> usize {
        self.columns.cols()
    }

    pub fn columns(&self) -> &Matrix {
        &self.columns
    }

    /// Copy of column `c`.
    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.columns.get(i, c)).collect()
    }

    /// Keeps the first `r` columns.
    pub fn truncated(&self, r: usize) -> Result<Basis> {
        if r == 0 || r > self.rank() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate rank-{} basis to {r} columns",
                self.rank()
            )));
        }
        let mut m = Matrix::zeros(self.dim(), r);
        for i in 0..self.dim() {
            for c in 0..r {
                m.set(i, c, self.columns.get(i, c));
            }
        }
        Basis::new(m)
    }

    /// The projector `U U^T`.
    pub fn projector(&self) -> Matrix {
        let d = self.dim();
        let mut p = Matrix::zeros(d, d);
        for c in 0..self.rank() {
            for i in 0..d {
                let ui = self.columns.get(i, c);
                if ui == 0.0 {
                    continue;
                }
                for j in 0..d {
                    let v = p.get(i, j) + ui * self.columns.get(j, c);
                    p.set(i, j, v);
                }
            }
        }
        p
    }
}

/// Per-mode orthonormal bases `U_1..U_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSet {
    factors: Vec<Basis>,
}

impl FactorSet {
    pub fn new(factors: Vec<Basis>) -> Result<Self> {
        if factors.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "factor set needs at least 2 modes, got {}",
                factors.len()
            )));
        }
        Ok(FactorSet { factors })
    }

    /// Number of modes k.
    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, j: usize) -> &Basis {
        &self.factors[j]
    }

    pub fn factors(&self) -> &[Basis] {
        &self.factors
    }

    /// Column counts per mode.
    pub fn ranks(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.rank()).collect()
    }
}

/// Smallest/largest retained singular value per mode and the aggregates
/// `Λ_min`, `Λ_max`, `κ = Λ_max / Λ_min`.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    pub sigma_min: Vec<f64>,
    pub sigma_max: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
}

pub(crate) fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.values())
}

pub(crate) fn from_na(m: &DMatrix<f64>) -> Matrix {
    let mut out = Matrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.set(i, j, m[(i, j)]);
        }
    }
    out
}

/// Sign convention: flip each column so its largest-magnitude entry is
/// positive, earliest index winning magnitude ties.
fn normalize_column_signs(m: &mut Matrix) {
    for c in 0..m.cols() {
        let mut best = 0usize;
        let mut best_abs = m.get(0, c).abs();
        for i in 1..m.rows() {
            let a = m.get(i, c).abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if m.get(best, c) < 0.0 {
            for i in 0..m.rows() {
                m.set(i, c, -m.get(i, c));
            }
        }
    }
}

/// One-sided Jacobi on the columns of `a` (stored column-major as
/// `ncols` stripes of length `len`), accumulating the rotations into
/// the `q x q` matrix `j` (row-major). On return the columns of `a` are
/// mutually orthogonal.
fn one_sided_jacobi(a: &mut [Vec<f64>], j: &mut Matrix) -> Result<()> {
    let q = a.len();
    const MAX_SWEEPS: usize = 60;
    let tol = 1e-15;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..q {
            for r in p + 1..q {
                let (alpha, beta, gamma) = {
                    let (ap, ar) = (&a[p], &a[r]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for i in 0..ap.len() {
                        alpha += ap[i] * ap[i];
                        beta += ar[i] * ar[i];
                        gamma += ap[i] * ar[i];
                    }
                    (alpha, beta, gamma)
                };
                if gamma.abs() <= tol * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = a.split_at_mut(r);
                let ap = &mut left[p];
                let ar = &mut right[0];
                for i in 0..ap.len() {
                    let x = ap[i];
                    let y = ar[i];
                    ap[i] = c * x - s * y;
                    ar[i] = s * x + c * y;
                }
                for row in 0..j.rows() {
                    let x = j.get(row, p);
                    let y = j.get(row, r);
                    j.set(row, p, c * x - s * y);
                    j.set(row, r, s * x + c * y);
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::SvdNonConvergence)
}

/// Thin SVD factors of `m` by one-sided Jacobi: returns the left
/// singular vectors (as `min(rows, cols)` columns, orthonormally
/// completed where the rank falls short) and all singular values,
/// sorted descending. No sign normalization.
fn svd_left(m: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    let (rows, cols) = (m.rows(), m.cols());
    let q = rows.min(cols);
    let tall = rows >= cols;
    // Work on the side with at most q columns: M itself when tall, M^T
    // when fat. Rotations then accumulate the (small) factor we need.
    let stripes: Vec<Vec<f64>> = if tall {
        (0..cols)
            .map(|c| (0..rows).map(|i| m.get(i, c)).collect())
            .collect()
    } else {
        (0..rows).map(|i| m.row(i).to_vec()).collect()
    };
    let mut work = stripes;
    let mut accum = Matrix::identity(q);
    one_sided_jacobi(&mut work, &mut accum)?;
    let mut sigma: Vec<f64> = work
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&x, &y| sigma[y].partial_cmp(&sigma[x]).expect("finite"));
    sigma = order.iter().map(|&i| sigma[i]).collect();

    let mut u = Matrix::zeros(rows, q);
    if tall {
        // left vectors are the normalized orthogonalized columns of M;
        // numerically-zero columns are completed against the rest
        let norm_floor = sigma[0] * f64::EPSILON;
        let mut filled = vec![false; q];
        for (c, &i) in order.iter().enumerate() {
            let s = sigma[c];
            if s > norm_floor && s > 0.0 {
                for row in 0..rows {
                    u.set(row, c, work[i][row] / s);
                }
                filled[c] = true;
            }
        }
        complete_columns(&mut u, &filled);
    } else {
        // M = J Sigma B^T with J accumulated on the rows of M
        for row in 0..rows {
            for (c, &i) in order.iter().enumerate() {
                u.set(row, c, accum.get(row, i));
            }
        }
    }
    Ok((u, sigma))
}

/// Fills the unfilled columns of `u` with unit vectors orthogonal to
/// every filled column (candidates: coordinate vectors).
fn complete_columns(u: &mut Matrix, filled: &[bool]) {
    let rows = u.rows();
    let mut have: Vec<Vec<f64>> = (0..u.cols())
        .filter(|&c| filled[c])
        .map(|c| (0..rows).map(|i| u.get(i, c)).collect())
        .collect();
    for c in 0..u.cols() {
        if filled[c] {
            continue;
        }
        let mut found = None;
        for cand in 0..rows {
            let mut v = vec![0.0; rows];
            v[cand] = 1.0;
            for _ in 0..2 {
                for col in &have {
                    let dot: f64 = v.iter().zip(col).map(|(a, b)| a * b).sum();
                    for (vi, ci) in v.iter_mut().zip(col) {
                        *vi -= dot * ci;
                    }
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                found = Some(v);
                break;
            }
        }
        let v = found.expect("rows >= cols guarantees a completion");
        for (i, &x) in v.iter().enumerate() {
            u.set(i, c, x);
        }
        have.push(v);
    }
}

/// Singular values of `m`, sorted descending.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    let (_, sigma) = svd_left(m)?;
    Ok(sigma)
}

/// Orthonormal basis of the top-`r` left singular subspace of `m`.
pub fn top_left_singular_vectors(m: &Matrix, r: usize) -> Result<Basis> {
    let max_r = m.rows().min(m.cols());
    if r == 0 || r > max_r {
        return Err(Error::InvalidArgument(format!(
            "rank {r} out of range for {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let (u, _) = svd_left(m)?;
    let mut cols = Matrix::zeros(m.rows(), r);
    for i in 0..m.rows() {
        for c in 0..r {
            cols.set(i, c, u.get(i, c));
        }
    }
    normalize_column_signs(&mut cols);
    Basis::new(cols)
}

/// Symmetric eigendecomposition sorted by descending eigenvalue.
/// The input is symmetrized as `(N + N^T)/2` after a symmetry check.
fn sym_eigen_sorted(n: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if n.rows() != n.cols() {
        return Err(Error::ShapeMismatch(format!(
            "eigendecomposition of {}x{} matrix",
            n.rows(),
            n.cols()
        )));
    }
    let scale = n.max_abs().max(1.0);
    let mut asym = 0.0f64;
    for i in 0..n.rows() {
        for j in i + 1..n.cols() {
            asym = asym.max((n.get(i, j) - n.get(j, i)).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(format!(
            "max asymmetry {asym} at magnitude {scale}"
        )));
    }
    let d = n.rows();
    let mut sym = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            sym.set(i, j, 0.5 * (n.get(i, j) + n.get(j, i)));
        }
    }
    let eig = to_na(&sym)
        .try_symmetric_eigen(f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::EigNonConvergence)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = from_na(&eig.eigenvectors.select_columns(&order));
    Ok((values, vecs))
}

/// Orthonormal eigenvectors of `n` with eigenvalue strictly greater
/// than `tau`, in descending eigenvalue order. `Ok(None)` signals an
/// empty selection; callers decide the fallback.
pub fn eigvecs_above(n: &Matrix, tau: f64) -> Result<Option<Basis>> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "threshold must be nonnegative, got {tau}"
        )));
    }
    let (values, vecs) = sym_eigen_sorted(n)?;
    let count = values.iter().take_while(|&&v| v > tau).count();
    if count == 0 {
        return Ok(None);
    }
    let mut cols = Matrix::zeros(n.rows(), count);
    for i in 0..n.rows() {
        for c in 0..count {
            cols.set(i, c, vecs.get(i, c));
        }
    }
    normalize_column_signs(&mut cols);
    Ok(Some(Basis::new(cols)?))
}

/// Top `count` eigenvectors of a symmetric matrix by descending
/// eigenvalue, regardless of any threshold.
pub fn top_eigenvectors(n: &Matrix, count: usize) -> Result<Basis> {
    if count == 0 || count > n.rows() {
        return Err(Error::InvalidArgument(format!(
            "eigenvector count {count} out of range for dim {}",
            n.rows()
        )));
    }
    let (_, vecs) = sym_eigen_sorted(n)?;
    let mut cols = Matrix::zeros(n.rows(), count);
    for i in 0..n.rows() {
        for c in 0..count {
            cols.set(i, c, vecs.get(i, c));
        }
    }
    normalize_column_signs(&mut cols);
    Basis::new(cols)
}

/// Spectral norm of `U U^T - V V^T`.
pub fn subspace_distance(u: &Basis, v: &Basis) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::ShapeMismatch(format!(
            "subspace distance between ambient dims {} and {}",
            u.dim(),
            v.dim()
        )));
    }
    let diff = u.projector().sub(&v.projector())?;
    let (values, _) = sym_eigen_sorted(&diff)?;
    Ok(values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Per-mode singular value extremes of the flattenings, where the
/// "smallest" is the `r_j`-th singular value of `M_j(A)`.
pub fn mode_spectrum(a: &Tensor, ranks: &[usize]) -> Result<ModeSpectrum> {
    let k = a.order();
    if ranks.len() != k {
        return Err(Error::ShapeMismatch(format!(
            "{} ranks for order-{k} tensor",
            ranks.len()
        )));
    }
    let mut sigma_min = Vec::with_capacity(k);
    let mut sigma_max = Vec::with_capacity(k);
    for (j, &r) in ranks.iter().enumerate() {
        let m = a.matricize(j)?;
        let max_r = m.rows().min(m.cols());
        if r == 0 || r > max_r {
            return Err(Error::InvalidArgument(format!(
                "rank {r} out of range for mode {j} flattening {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let sigma = singular_values(&m)?;
        let smin = sigma[r - 1];
        if smin < RANK_EPS {
            return Err(Error::RankDeficient(format!(
                "mode {j}: singular value {r} is {smin}"
            )));
        }
        sigma_max.push(sigma[0]);
        sigma_min.push(smin);
    }
    let lambda_min = sigma_min.iter().cloned().fold(f64::INFINITY, f64::min);
    let lambda_max = sigma_max.iter().cloned().fold(0.0f64, f64::max);
    Ok(ModeSpectrum {
        sigma_min,
        sigma_max,
        lambda_min,
        lambda_max,
        kappa: lambda_max / lambda_min,
    })
}
