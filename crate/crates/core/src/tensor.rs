//! Dense tensors and the multilinear algebra they support: mode-j
//! flattening, marginal multiplication, inner products, norms, outer
//! products and multilinear projection.
//!
//! A `Tensor` stores its entries in lexicographic order with the *last*
//! index varying fastest. A mode-j flattening `M_j(A)` is the
//! `d_j x (prod_{j' != j} d_{j'})` matrix whose columns are the mode-j
//! fibers; its column index encodes the retained modes in ascending
//! order with the last retained mode varying fastest. For a third order
//! tensor and mode 0 this is `col = i_1 * d_2 + i_2`.

use crate::error::{Error, Result};
use crate::spectra::FactorSet;

/// Dense k-th order tensor over `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

/// Dense row-major matrix over `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

/// A coordinate tuple into a k-th order tensor, 0-based per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    coords: Vec<usize>,
}

impl MultiIndex {
    pub fn new(coords: Vec<usize>) -> Self {
        MultiIndex { coords }
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    /// Checks that the index has the right order and every coordinate is
    /// in range for `dims`.
    pub fn check_in(&self, dims: &[usize]) -> Result<()> {
        if self.coords.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "index order {} does not match tensor order {}",
                self.coords.len(),
                dims.len()
            )));
        }
        for (j, (&c, &d)) in self.coords.iter().zip(dims).enumerate() {
            if c >= d {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {c} out of range for mode {j} of extent {d}"
                )));
            }
        }
        Ok(())
    }
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "tensor order must be at least 2, got {}",
            dims.len()
        )));
    }
    let mut len = 1usize;
    for &d in dims {
        if d == 0 {
            return Err(Error::InvalidArgument("zero-extent mode".into()));
        }
        len = len
            .checked_mul(d)
            .ok_or_else(|| Error::InvalidArgument("dimension product overflows".into()))?;
    }
    Ok(len)
}

impl Tensor {
    /// Builds a tensor from its dimension vector and entries in storage
    /// order (last index fastest).
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if values.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for dims {:?}, got {}",
                len,
                dims,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("tensor entry {v}")));
        }
        Ok(Tensor { dims, values })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = check_dims(&dims)?;
        Ok(Tensor {
            dims,
            values: vec![0.0; len],
        })
    }

    /// The indicator tensor `e_omega`: one at `omega`, zero elsewhere.
    pub fn basis(dims: Vec<usize>, omega: &MultiIndex) -> Result<Self> {
        let mut t = Tensor::zeros(dims)?;
        omega.check_in(&t.dims)?;
        let lin = t.linear_index(omega.coords());
        t.values[lin] = 1.0;
        Ok(t)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Tensor order k.
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Total number of entries.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Linear storage offset of a coordinate tuple (last index fastest).
    pub fn linear_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dims.len());
        let mut lin = 0usize;
        for (&c, &d) in coords.iter().zip(&self.dims) {
            debug_assert!(c < d);
            lin = lin * d + c;
        }
        lin
    }

    pub fn entry(&self, coords: &[usize]) -> f64 {
        self.values[self.linear_index(coords)]
    }

    pub fn set_entry(&mut self, coords: &[usize], v: f64) {
        let lin = self.linear_index(coords);
        self.values[lin] = v;
    }

    /// Rank-one tensor `(u_1 ⊗ ... ⊗ u_k)(i_1,...,i_k) = u_1(i_1)...u_k(i_k)`.
    pub fn outer_product(vectors: &[Vec<f64>]) -> Result<Self> {
        if vectors.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "outer product needs at least 2 vectors, got {}",
                vectors.len()
            )));
        }
        if vectors.iter().any(|v| v.is_empty()) {
            return Err(Error::InvalidArgument(
                "empty vector in outer product".into(),
            ));
        }
        let dims: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
        let mut t = Tensor::zeros(dims)?;
        // Build iteratively: after processing vector m the prefix block of
        // length d_1*...*d_m holds the partial products.
        t.values[0] = 1.0;
        let mut prefix = 1usize;
        for v in vectors {
            for i in (0..prefix).rev() {
                let base = t.values[i];
                for (c, &x) in v.iter().enumerate() {
                    t.values[i * v.len() + c] = base * x;
                }
            }
            prefix *= v.len();
        }
        if let Some(v) = t.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("outer product entry {v}")));
        }
        Ok(t)
    }

    /// `<A,B> = sum_omega A(omega) B(omega)`.
    pub fn inner_product(&self, other: &Tensor) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(format!(
                "inner product dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Vectorized l_p norm; `p = f64::INFINITY` gives the max-abs entry.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "lp norm needs p >= 1, got {p}"
            )));
        }
        if p == f64::INFINITY {
            return Ok(self.values.iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        if p == 2.0 {
            return Ok(self.l2_norm());
        }
        if p == 1.0 {
            return Ok(self.values.iter().map(|v| v.abs()).sum());
        }
        Ok(self
            .values
            .iter()
            .map(|v| v.abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p))
    }

    /// Vectorized l_2 norm.
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Tensor {
        Tensor {
            dims: self.dims.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch("tensor add".into()));
        }
        Ok(Tensor {
            dims: self.dims.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch("tensor sub".into()));
        }
        Ok(Tensor {
            dims: self.dims.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Splits the storage layout around `mode` as `[outer][d_mode][inner]`
    /// blocks, where `outer` multiplies the modes before `mode` and
    /// `inner` the modes after it.
    fn split_at_mode(&self, mode: usize) -> (usize, usize, usize) {
        let outer: usize = self.dims[..mode].iter().product();
        let inner: usize = self.dims[mode + 1..].iter().product();
        (outer, self.dims[mode], inner)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.dims.len() {
            return Err(Error::InvalidArgument(format!(
                "mode {mode} out of range for order {}",
                self.dims.len()
            )));
        }
        Ok(())
    }

    /// Mode-j flattening `M_j(A)`: row index `i_j`, column index the
    /// mixed-radix code of the remaining coordinates in ascending mode
    /// order, last retained mode fastest.
    pub fn matricize(&self, mode: usize) -> Result<Matrix> {
        self.check_mode(mode)?;
        let (outer, dj, inner) = self.split_at_mode(mode);
        let ncols = outer * inner;
        let mut m = Matrix::zeros(dj, ncols);
        for o in 0..outer {
            for r in 0..dj {
                let src = (o * dj + r) * inner;
                let dst = r * ncols + o * inner;
                m.values[dst..dst + inner].copy_from_slice(&self.values[src..src + inner]);
            }
        }
        Ok(m)
    }

    /// Inverse of [`Tensor::matricize`] for the stated column ordering.
    pub fn dematricize(m: &Matrix, mode: usize, dims: &[usize]) -> Result<Tensor> {
        let len = check_dims(dims)?;
        if mode >= dims.len() {
            return Err(Error::InvalidArgument(format!(
                "mode {mode} out of range for order {}",
                dims.len()
            )));
        }
        let outer: usize = dims[..mode].iter().product();
        let inner: usize = dims[mode + 1..].iter().product();
        let dj = dims[mode];
        if m.rows != dj || m.cols != outer * inner {
            return Err(Error::ShapeMismatch(format!(
                "matrix {}x{} does not flatten mode {mode} of dims {dims:?}",
                m.rows, m.cols
            )));
        }
        let mut values = vec![0.0; len];
        let ncols = m.cols;
        for o in 0..outer {
            for r in 0..dj {
                let dst = (o * dj + r) * inner;
                let src = r * ncols + o * inner;
                values[dst..dst + inner].copy_from_slice(&m.values[src..src + inner]);
            }
        }
        Tensor::new(dims.to_vec(), values)
    }

    /// Marginal multiplication `A ×_j B` with `B` of shape `d_j x c`:
    /// `(A ×_j B)(..., i_j, ...) = sum_{i'} A(..., i', ...) B(i', i_j)`,
    /// so that `M_j(A ×_j B) = B^T M_j(A)`.
    pub fn mode_multiply(&self, mode: usize, b: &Matrix) -> Result<Tensor> {
        self.check_mode(mode)?;
        let (outer, dj, inner) = self.split_at_mode(mode);
        if b.rows != dj {
            return Err(Error::ShapeMismatch(format!(
                "mode {mode} has extent {dj} but matrix has {} rows",
                b.rows
            )));
        }
        let cols = b.cols;
        let mut dims = self.dims.clone();
        dims[mode] = cols;
        let mut out = vec![0.0; outer * cols * inner];
        for o in 0..outer {
            for r in 0..dj {
                let src = &self.values[(o * dj + r) * inner..(o * dj + r + 1) * inner];
                let brow = &b.values[r * cols..(r + 1) * cols];
                for (c, &w) in brow.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let dst = &mut out[(o * cols + c) * inner..(o * cols + c + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
        }
        Ok(Tensor { dims, values: out })
    }
}

/// Orthogonal projection of `A` onto the factor subspaces:
/// `A ×_1 U_1 U_1^T ×_2 ... ×_k U_k U_k^T`, computed as successive
/// marginal multiplications by `U_j` then `U_j^T`.
pub fn project_multilinear(a: &Tensor, factors: &FactorSet) -> Result<Tensor> {
    if factors.order() != a.order() {
        return Err(Error::ShapeMismatch(format!(
            "{} factors for order-{} tensor",
            factors.order(),
            a.order()
        )));
    }
    let mut t = a.clone();
    for j in 0..a.order() {
        let u = factors.factor(j).columns();
        if u.rows() != a.dims()[j] {
            return Err(Error::ShapeMismatch(format!(
                "factor {j} has {} rows but mode extent is {}",
                u.rows(),
                a.dims()[j]
            )));
        }
        t = t.mode_multiply(j, u)?;
        t = t.mode_multiply(j, &u.transpose())?;
    }
    Ok(t)
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for {rows}x{cols}, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {v}")));
        }
        Ok(Matrix { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.values[j * self.rows + i] = self.values[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.values[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.values[k * other.cols..(k + 1) * other.cols];
                let orow = &mut out.values[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Matrix, c: f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch("matrix add".into()));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch("matrix sub".into()));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// Iterates all coordinate tuples of `dims` in storage order.
pub fn index_iter(dims: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let len: usize = dims.iter().product();
    (0..len).map(move |mut lin| {
        let mut coords = vec![0usize; dims.len()];
        for (c, &d) in coords.iter_mut().zip(dims).rev() {
            *c = lin % d;
            lin /= d;
        }
        coords
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn make_tensor_row_major() {
        let t = Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.entry(&[0, 1]), 2.0);
        assert_eq!(t.entry(&[1, 0]), 3.0);
    }

    #[test]
    fn make_tensor_zero_norm() {
        let t = Tensor::zeros(vec![2, 2, 2]).unwrap();
        assert_eq!(t.l2_norm(), 0.0);
    }

    #[test]
    fn make_tensor_length_mismatch() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
    }

    #[test]
    fn make_tensor_rejects_non_finite() {
        assert!(Tensor::new(vec![2, 2], vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn outer_product_indicator() {
        let t = Tensor::outer_product(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        for c in index_iter(t.dims()) {
            let expect = if c[0] == 0 && c[1] == 1 { 1.0 } else { 0.0 };
            assert_eq!(t.entry(&c), expect);
        }
    }

    #[test]
    fn outer_product_all_ones() {
        let ones = vec![1.0, 1.0];
        let t = Tensor::outer_product(&[ones.clone(), ones.clone(), ones]).unwrap();
        assert!(t.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn outer_product_scalars() {
        let t = Tensor::outer_product(&[vec![2.0], vec![3.0], vec![5.0]]).unwrap();
        assert_eq!(t.dims(), &[1, 1, 1]);
        assert_eq!(t.values()[0], 30.0);
    }

    #[test]
    fn outer_product_rejects_empty() {
        assert!(Tensor::outer_product(&[]).is_err());
        assert!(Tensor::outer_product(&[vec![1.0], vec![]]).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let a = Tensor::new(vec![2, 2, 2], vec![1.0; 8]).unwrap();
        let b = Tensor::new(vec![2, 2, 2], vec![2.0; 8]).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), 16.0);
        // basis tensors are orthonormal
        let e1 = Tensor::basis(vec![2, 2], &MultiIndex::new(vec![0, 1])).unwrap();
        let e2 = Tensor::basis(vec![2, 2], &MultiIndex::new(vec![1, 0])).unwrap();
        assert_eq!(e1.inner_product(&e1).unwrap(), 1.0);
        assert_eq!(e1.inner_product(&e2).unwrap(), 0.0);
        // dims mismatch
        let c = Tensor::zeros(vec![2, 3]).unwrap();
        assert!(a.inner_product(&c).is_err());
    }

    #[test]
    fn lp_norm_examples() {
        let a = Tensor::new(vec![2, 2, 2], vec![1.0; 8]).unwrap();
        assert_abs_diff_eq!(a.lp_norm(2.0).unwrap(), 8f64.sqrt(), epsilon = 1e-15);
        assert_eq!(a.lp_norm(1.0).unwrap(), 8.0);
        assert_eq!(a.lp_norm(f64::INFINITY).unwrap(), 1.0);
        let e = Tensor::basis(vec![2, 3, 2], &MultiIndex::new(vec![1, 2, 0])).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            assert_abs_diff_eq!(e.lp_norm(p).unwrap(), 1.0, epsilon = 1e-15);
        }
        assert!(a.lp_norm(0.5).is_err());
    }

    #[test]
    fn matricize_mode0_matches_flattening_formula() {
        // M_0(A)(i_0, i_1*d_2 + i_2) == A(i_0, i_1, i_2), 0-based counterpart
        // of the 1-based mode-1 display.
        let vals: Vec<f64> = (0..8).map(|v| v as f64).collect();
        let a = Tensor::new(vec![2, 2, 2], vals).unwrap();
        let m = a.matricize(0).unwrap();
        for i0 in 0..2 {
            for i1 in 0..2 {
                for i2 in 0..2 {
                    assert_eq!(m.get(i0, i1 * 2 + i2), a.entry(&[i0, i1, i2]));
                }
            }
        }
        assert_eq!(m.get(0, 2), a.entry(&[0, 1, 0]));
    }

    #[test]
    fn matricize_mode1_entry_map_brute_force() {
        // 2x3x4, mode 1: shape 3x8, col = i_0*d_2 + i_2.
        let vals: Vec<f64> = (0..24).map(|v| v as f64).collect();
        let a = Tensor::new(vec![2, 3, 4], vals).unwrap();
        let m = a.matricize(1).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 8));
        for i0 in 0..2 {
            for i1 in 0..3 {
                for i2 in 0..4 {
                    assert_eq!(m.get(i1, i0 * 4 + i2), a.entry(&[i0, i1, i2]));
                }
            }
        }
    }

    #[test]
    fn dematricize_round_trip() {
        let vals: Vec<f64> = (0..12).map(|v| (v as f64).sin()).collect();
        let a = Tensor::new(vec![2, 3, 2], vals).unwrap();
        for j in 0..3 {
            let m = a.matricize(j).unwrap();
            let back = Tensor::dematricize(&m, j, a.dims()).unwrap();
            assert_eq!(back, a);
        }
    }

    #[test]
    fn dematricize_zero_and_shape_errors() {
        let z = Matrix::zeros(2, 6);
        let t = Tensor::dematricize(&z, 0, &[2, 3, 2]).unwrap();
        assert!(t.values().iter().all(|&v| v == 0.0));
        assert!(Tensor::dematricize(&z, 1, &[2, 3, 2]).is_err());
    }

    #[test]
    fn dematricize_basis_tensors() {
        let dims = [2usize, 2, 3];
        for coords in index_iter(&dims) {
            let e = Tensor::basis(dims.to_vec(), &MultiIndex::new(coords)).unwrap();
            for j in 0..3 {
                let m = e.matricize(j).unwrap();
                assert_eq!(Tensor::dematricize(&m, j, &dims).unwrap(), e);
            }
        }
    }

    #[test]
    fn mode_multiply_identity() {
        let vals: Vec<f64> = (0..12).map(|v| (v as f64).cos()).collect();
        let a = Tensor::new(vec![2, 3, 2], vals).unwrap();
        for j in 0..3 {
            let b = Matrix::identity(a.dims()[j]);
            assert_eq!(a.mode_multiply(j, &b).unwrap(), a);
        }
    }

    #[test]
    fn mode_multiply_rank_one_contraction() {
        let u = vec![1.0, 2.0];
        let v = vec![0.5, -1.0, 2.0];
        let w = vec![3.0, 1.0];
        let a = Tensor::outer_product(&[u.clone(), v.clone(), w.clone()]).unwrap();
        let b = Matrix::new(2, 1, vec![4.0, -1.0]).unwrap(); // column vector
        let r = a.mode_multiply(0, &b).unwrap();
        assert_eq!(r.dims(), &[1, 3, 2]);
        let btu = 4.0 * 1.0 + (-1.0) * 2.0;
        let expect = Tensor::outer_product(&[vec![btu], v, w]).unwrap();
        for (x, y) in r.values().iter().zip(expect.values()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn mode_multiply_shape_error() {
        let a = Tensor::zeros(vec![2, 3, 2]).unwrap();
        let b = Matrix::zeros(4, 2);
        assert!(a.mode_multiply(1, &b).is_err());
        assert!(a.mode_multiply(3, &Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn matrix_transpose_matmul() {
        let a = Matrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let at = a.transpose();
        assert_eq!(at.get(2, 1), 6.0);
        let g = a.matmul(&at).unwrap();
        assert_eq!(g.get(0, 0), 14.0);
        assert_eq!(g.get(0, 1), 32.0);
        assert_eq!(g.get(1, 1), 77.0);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn index_iter_storage_order() {
        let idx: Vec<Vec<usize>> = index_iter(&[2, 3]).collect();
        assert_eq!(idx[0], vec![0, 0]);
        assert_eq!(idx[1], vec![0, 1]);
        assert_eq!(idx[3], vec![1, 0]);
        assert_eq!(idx.len(), 6);
    }
}
