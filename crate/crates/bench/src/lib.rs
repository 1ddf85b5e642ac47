//! Seeded instance generation shared by the benchmarks.

use chorefair::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Integer disutilities drawn uniformly from `lo..=hi`.
pub fn instance(seed: u64, n: usize, m: usize, lo: i64, hi: i64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect();
    Instance::from_ints(&rows).expect("valid instance")
}
