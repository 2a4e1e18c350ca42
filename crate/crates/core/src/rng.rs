//! Seedable, splittable random number streams.
//!
//! All randomized code in this crate draws from ChaCha12, which is
//! stable across platforms and releases. Replicate streams are derived
//! from a master seed plus a stream id, so sweeps are reproducible and
//! independent of execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The generator used throughout the crate.
pub type StreamRng = ChaCha12Rng;

/// Root generator for a master seed.
pub fn master_rng(seed: u64) -> StreamRng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Independent stream `stream` under the same master seed.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Packs an (outer, inner) pair of loop indices into one stream id.
pub fn pack_stream(outer: u32, inner: u32) -> u64 {
    ((outer as u64) << 32) | inner as u64
}
