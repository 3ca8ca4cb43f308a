//! Deterministic pseudo-random streams.
//!
//! Every stream is a ChaCha8 generator seeded through
//! `ChaCha8Rng::seed_from_u64`. Independent sub-streams (one per attempt or
//! trial) use the seed `seed ^ splitmix64(index)`, where `splitmix64` is the
//! standard SplitMix64 output function applied to `index`:
//!
//! ```text
//! z = index + 0x9E3779B97F4A7C15
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z ^ (z >> 31)
//! ```
//! (all arithmetic wrapping mod 2^64).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn splitmix64(index: u64) -> u64 {
    let mut z = index.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed ^ splitmix64(index)
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sub_stream(seed: u64, index: u64) -> Stream {
    stream(derive_seed(seed, index))
}
