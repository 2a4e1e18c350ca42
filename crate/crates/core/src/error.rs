//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape or dimension disagreement between operands.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An argument outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A NaN or infinity where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Dense SVD did not converge.
    #[error("SVD did not converge")]
    SvdNonConvergence,

    /// Symmetric eigendecomposition did not converge.
    #[error("eigendecomposition did not converge")]
    EigNonConvergence,

    /// A matrix expected to be symmetric is not, within tolerance.
    #[error("matrix not symmetric within tolerance: {0}")]
    NotSymmetric(String),

    /// A requested singular value is numerically zero.
    #[error("rank deficient: {0}")]
    RankDeficient(String),

    /// A brute-force oracle was asked to run beyond its size guard.
    #[error("oracle size guard exceeded: {0}")]
    SizeGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
