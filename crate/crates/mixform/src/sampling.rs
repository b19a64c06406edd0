//! Deterministic sampling utilities.
//!
//! Two sources are used throughout the crate: a Halton low-discrepancy
//! sequence for geometric validation sweeps (coverage matters more than
//! independence there) and a counter-mode seeded RNG for everything else.
//! Both are fully determined by their inputs so every report is
//! reproducible from the recorded seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// First d primes, enough for the dimensions handled here.
const HALTON_BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Radical-inverse of `i` in base `b`, the 1-d Halton value.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// `count` Halton points in the axis-aligned box `lo[k] .. hi[k]`.
///
/// The sequence starts at index `offset + 1` so distinct sweeps can draw
/// disjoint runs of the same global sequence.
pub fn halton_box(lo: &[f64], hi: &[f64], count: usize, offset: u64) -> Vec<Vec<f64>> {
    let d = lo.len();
    assert_eq!(d, hi.len());
    assert!(d <= HALTON_BASES.len());
    (0..count)
        .map(|j| {
            let i = offset + 1 + j as u64;
            (0..d)
                .map(|k| lo[k] + (hi[k] - lo[k]) * radical_inverse(i, HALTON_BASES[k]))
                .collect()
        })
        .collect()
}

/// Seeded RNG used for randomized starts (norm estimation, stress vectors).
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
