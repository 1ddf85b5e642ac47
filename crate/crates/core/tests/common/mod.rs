#![allow(dead_code)]

use chorefair::Instance;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Disutilities drawn uniformly from `lo..=hi`.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, lo: i64, hi: i64) -> Instance {
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect();
    Instance::from_ints(&rows).unwrap()
}

pub fn proportional_fixture() -> Instance {
    serde_json::from_str(include_str!("../fixtures/three_proportional.json")).unwrap()
}
