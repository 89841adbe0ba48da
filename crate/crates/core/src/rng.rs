//! Seed derivation.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] addressed by a
//! master seed and a stream number, so work split into chunks reproduces
//! the same draws regardless of how many threads run it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Deterministic generator for `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream number for a signed index (zig-zag encoded).
pub fn signed_stream(k: i64) -> u64 {
    ((k << 1) ^ (k >> 63)) as u64
}

/// Draws a fresh master seed from an existing generator.
pub fn child_seed<R: RngCore + ?Sized>(rng: &mut R) -> u64 {
    rng.next_u64()
}
