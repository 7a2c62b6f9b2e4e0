//! Seed splitting.
//!
//! Every experiment is driven by one 64-bit master seed. Independent streams
//! (one per run, one per instance, ...) are derived with
//!
//! ```text
//! subseed(seed, index) = splitmix64(seed ^ splitmix64(index + 1))
//! ```
//!
//! and each stream feeds a [`ChaCha8Rng`]. Streams are a pure function of
//! `(seed, index)`, so runs can execute in any order, on any number of
//! threads, and still produce identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate.
pub type SimRng = ChaCha8Rng;

/// One round of the SplitMix64 output function.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn subseed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Generator for stream `index` of master seed `seed`.
pub fn stream(seed: u64, index: u64) -> SimRng {
    rng_from_seed(subseed(seed, index))
}
