//! Brute-force oracles used by tests: exhaustive expectations of the
//! sampling estimators, the literal pairwise U-statistic, a naive
//! marginal multiplication, and a Jacobi-rotation eigensolver providing
//! an SVD-truncation route independent of the production solver.
//!
//! Oracles hard-fail on their size guards instead of subsampling, so a
//! passing comparison always means the full computation ran.

use crate::error::{Error, Result};
use crate::obs::{n_hat, t_init, Dataset};
use crate::spectra::Basis;
use crate::tensor::{index_iter, Matrix, MultiIndex, Tensor};

const MAX_ENTRIES: usize = 10_000;
const MAX_PAIRWISE_N: usize = 500;
const MAX_EXHAUSTIVE_PAIR_ENTRIES: usize = 256;

fn guard_entries(t: &Tensor, limit: usize) -> Result<()> {
    if t.len() > limit {
        return Err(Error::SizeGuard(format!(
            "{} entries exceeds oracle limit {limit}",
            t.len()
        )));
    }
    Ok(())
}

/// Exact expectation of `t_init` over all single-observation noiseless
/// datasets (uniform position, no noise), computed by enumeration.
pub fn expect_t_init_exhaustive(t: &Tensor) -> Result<Tensor> {
    guard_entries(t, MAX_ENTRIES)?;
    let mut acc = Tensor::zeros(t.dims().to_vec())?;
    let mut count = 0usize;
    for coords in index_iter(t.dims()) {
        let y = t.entry(&coords);
        let data = Dataset::new(t.dims().to_vec(), vec![(MultiIndex::new(coords), y)])?;
        acc = acc.add(&t_init(&data))?;
        count += 1;
    }
    Ok(acc.scaled(1.0 / count as f64))
}

/// Exact expectation of `n_hat` over all ordered pairs of noiseless
/// observations (the two iid draws of an n = 2 sample), by enumeration.
pub fn expect_n_hat_exhaustive(t: &Tensor, mode: usize) -> Result<Matrix> {
    guard_entries(t, MAX_EXHAUSTIVE_PAIR_ENTRIES)?;
    let dj = t.dims()[mode];
    let mut acc = Matrix::zeros(dj, dj);
    let mut count = 0usize;
    for c1 in index_iter(t.dims()) {
        for c2 in index_iter(t.dims()) {
            let data = Dataset::new(
                t.dims().to_vec(),
                vec![
                    (MultiIndex::new(c1.clone()), t.entry(&c1)),
                    (MultiIndex::new(c2.clone()), t.entry(&c2)),
                ],
            )?;
            acc = acc.add_scaled(&n_hat(&data, mode)?, 1.0)?;
            count += 1;
        }
    }
    Ok(acc.scaled(1.0 / count as f64))
}

/// The literal O(n^2) double loop over observation pairs, with the
/// flattenings of the indicator tensors materialized as real matrices.
pub fn n_hat_pairwise(data: &Dataset, mode: usize) -> Result<Matrix> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "pairwise U-statistic needs n >= 2, got {n}"
        )));
    }
    if n > MAX_PAIRWISE_N {
        return Err(Error::SizeGuard(format!(
            "n = {n} exceeds pairwise oracle limit {MAX_PAIRWISE_N}"
        )));
    }
    let total: usize = data.dims().iter().product();
    if total > MAX_ENTRIES {
        return Err(Error::SizeGuard(format!(
            "{total} entries exceeds pairwise oracle limit {MAX_ENTRIES}"
        )));
    }
    let flats: Vec<Matrix> = data
        .obs()
        .iter()
        .map(|(omega, _)| {
            Tensor::basis(data.dims().to_vec(), omega).and_then(|e| e.matricize(mode))
        })
        .collect::<Result<_>>()?;
    let dj = data.dims()[mode];
    let mut acc = Matrix::zeros(dj, dj);
    for (i, (_, yi)) in data.obs().iter().enumerate() {
        for (ip, (_, yip)) in data.obs().iter().enumerate() {
            if i == ip {
                continue;
            }
            let prod = flats[i].matmul(&flats[ip].transpose())?;
            acc = acc.add_scaled(&prod, yi * yip)?;
        }
    }
    let totalf = total as f64;
    let c = totalf * totalf / (n as f64 * (n as f64 - 1.0));
    Ok(acc.scaled(c))
}

/// Direct triple-loop marginal multiplication.
pub fn mode_multiply_naive(a: &Tensor, mode: usize, b: &Matrix) -> Result<Tensor> {
    if mode >= a.order() {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for order {}",
            a.order()
        )));
    }
    if b.rows() != a.dims()[mode] {
        return Err(Error::ShapeMismatch(format!(
            "mode {mode} extent {} vs matrix rows {}",
            a.dims()[mode],
            b.rows()
        )));
    }
    let mut dims = a.dims().to_vec();
    dims[mode] = b.cols();
    let mut out = Tensor::zeros(dims)?;
    let coords_out: Vec<Vec<usize>> = index_iter(out.dims()).collect();
    for coords in coords_out {
        let mut sum = 0.0;
        let mut src = coords.clone();
        for ip in 0..a.dims()[mode] {
            src[mode] = ip;
            sum += a.entry(&src) * b.get(ip, coords[mode]);
        }
        out.set_entry(&coords, sum);
    }
    Ok(out)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations,
/// sorted by descending eigenvalue. Independent of the production
/// eigensolver; intended for small test matrices.
pub fn sym_eigen_jacobi(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if m.rows() != m.cols() {
        return Err(Error::ShapeMismatch(
            "jacobi eigen of non-square matrix".into(),
        ));
    }
    let d = m.rows();
    let mut a = m.clone();
    let mut v = Matrix::identity(d);
    let tol = 1e-14 * a.max_abs().max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in p + 1..d {
                off = off.max(a.get(p, q).abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a.get(p, q);
                if apq.abs() <= tol {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..d {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, c * aip - s * aiq);
                    a.set(i, q, s * aip + c * aiq);
                }
                for i in 0..d {
                    let api = a.get(p, i);
                    let aqi = a.get(q, i);
                    a.set(p, i, c * api - s * aqi);
                    a.set(q, i, s * api + c * aqi);
                }
                for i in 0..d {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| a.get(y, y).partial_cmp(&a.get(x, x)).expect("finite"));
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vecs = Matrix::zeros(d, d);
    for (c, &i) in order.iter().enumerate() {
        for r in 0..d {
            vecs.set(r, c, v.get(r, i));
        }
    }
    Ok((values, vecs))
}

/// Top-`r` left singular subspace of `m` via Jacobi eigendecomposition
/// of the Gram matrix `m m^T`. Oracle counterpart of the production
/// truncated SVD.
pub fn top_left_singular_vectors_oracle(m: &Matrix, r: usize) -> Result<Basis> {
    if r == 0 || r > m.rows().min(m.cols()) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} out of range for {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let gram = m.matmul(&m.transpose())?;
    let (_, vecs) = sym_eigen_jacobi(&gram)?;
    let mut cols = Matrix::zeros(m.rows(), r);
    for i in 0..m.rows() {
        for c in 0..r {
            cols.set(i, c, vecs.get(i, c));
        }
    }
    Basis::new(cols)
}
