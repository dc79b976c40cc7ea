//! Reproducible seed derivation for parallel tasks.
//!
//! Child seeds are the SplitMix64 output at counter position `index + 1` of
//! a stream whose state starts at `master`:
//!
//! ```text
//! z = master + (index + 1) * 0x9E3779B97F4A7C15      (wrapping)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! child = z ^ (z >> 31)
//! ```
//!
//! Every column or trial owns a generator seeded this way, so results do not
//! depend on how work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::maps::Interval;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator used for every stochastic component in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws a point strictly inside `domain`.
pub fn uniform_interior(domain: Interval, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    loop {
        let u: f64 = rng.random();
        let x = domain.lo + u * domain.width();
        if x > domain.lo && x < domain.hi {
            return x;
        }
    }
}
