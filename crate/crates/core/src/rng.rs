//! Seed derivation.
//!
//! Every stochastic routine takes a plain `u64` seed and builds its own
//! ChaCha12 generator from it. Child seeds are derived from a parent seed
//! and an index by reading the first word of the ChaCha stream selected by
//! that index, so a trial's randomness depends only on `(master, trial)` and
//! never on the order in which trials execute.
//!
//! Gaussian variates come from `rand_distr::StandardNormal` (ziggurat). The
//! crate versions are pinned by `Cargo.lock`, which keeps seeds reproducible
//! across builds.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Purpose tags for seeds derived inside one benchmark trial.
pub mod purpose {
    pub const MATRIX: u64 = 1;
    pub const SIGNAL: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const SOLVER: u64 = 4;
    pub const LAYOUT: u64 = 5;
    pub const DICTIONARY: u64 = 6;
}

/// Generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Child seed for `index` under `parent`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    let mut rng = ChaCha12Rng::seed_from_u64(parent);
    rng.set_stream(index);
    rng.next_u64()
}
