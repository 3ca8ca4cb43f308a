//! Instance generators shared by the benchmarks.

use flatconv_core::{sample_points, GridSpec, SymmetricCounts};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `floor(n^0.6)` uniform points on the grid of order `n`.
pub fn random_measure(n: u64, seed: u64) -> SymmetricCounts {
    let grid = GridSpec::new(n).expect("odd n");
    let points = (n as f64).powf(0.6).floor() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_points(grid, points, &mut rng).expect("valid draw")
}
