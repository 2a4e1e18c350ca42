//! Dense low-rank tensor completion from noisy entries.
//!
//! The pipeline estimates a k-th order tensor of low multilinear rank
//! from uniformly sampled, noise-corrupted entries:
//!
//! 1. form the unbiased inverse-probability-weighted dense estimate,
//! 2. initialize per-mode factor subspaces, either from thresholded
//!    eigenvectors of a U-statistic estimate of each mode's
//!    second-moment matrix, or from a truncated HOSVD baseline,
//! 3. refine the factors with higher-order orthogonal (power)
//!    iterations and project onto them.
//!
//! [`tensor`] holds the dense tensor algebra, [`spectra`] the spectral
//! primitives, [`obs`] the sampling model and estimators, [`completion`]
//! the pipeline, [`synth`] random instance generators and diagnostics,
//! and [`oracle`] brute-force counterparts used by tests.

pub mod completion;
pub mod error;
pub mod obs;
pub mod oracle;
pub mod rng;
pub mod spectra;
pub mod synth;
pub mod tensor;

pub use completion::{
    complete, default_iter_max, default_lambda, hosvd_init, power_iterations, spectral_init,
    CompletionConfig, Estimate, InitMethod, LambdaMode,
};
pub use error::{Error, Result};
pub use obs::{full_dataset, n_exact, n_hat, sample_dataset, t_init, Dataset, NoiseSpec};
pub use spectra::{
    eigvecs_above, mode_spectrum, subspace_distance, top_left_singular_vectors, Basis, FactorSet,
    ModeSpectrum,
};
pub use synth::{
    coherence, generate, generate_with, random_orthonormal, relative_error, spikiness,
    subspace_error, tensor_coherence, ModelKind, ModelSpec,
};
pub use tensor::{index_iter, project_multilinear, Matrix, MultiIndex, Tensor};
