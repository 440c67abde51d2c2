//! Stateless seed derivation.
//!
//! Every random draw in the crate is keyed by a pure function of a master seed
//! and an integer coordinate (entry position, job index, trajectory id), so
//! results never depend on traversal order or worker scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for job `index` under `master`.
#[inline]
pub fn job_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Seed for matrix entry `(i, j)`, `i <= j`.
#[inline]
pub fn entry_seed(master: u64, i: usize, j: usize) -> u64 {
    let coord = ((i as u64) << 32) ^ (j as u64);
    splitmix64(master ^ splitmix64(coord))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
