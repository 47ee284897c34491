//! Shared fixtures for the benchmarks.

use pooldecode_core::model::{gen_test_matrix, sample_defective_set, simulate_outcomes};
use pooldecode_core::{Instance, NoiseParams};

/// A seeded instance with `p = 1 / K`.
pub fn instance(n: usize, k: usize, m: usize, u: f64, q: f64, seed: u64) -> Instance {
    let noise = NoiseParams::new(u, q).expect("valid noise");
    let sd = sample_defective_set(n, k, seed).expect("K <= N");
    let design = gen_test_matrix(m, n, 1.0 / k as f64, seed ^ 1).expect("valid p");
    simulate_outcomes(design, &sd, noise, seed ^ 2, seed ^ 3).expect("valid instance")
}

/// The standard simulation point: `N = 256`, `K = 16`, `u = 0.05`, `q = 0.1`.
pub fn standard(m: usize, seed: u64) -> Instance {
    instance(256, 16, m, 0.05, 0.1, seed)
}
