//! Deterministic seeding. Every randomized routine takes a root seed; per-trial
//! streams are derived from `(root, trial)` so results do not depend on the order
//! in which trials are executed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent stream under `root`.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    mix64(root ^ mix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn trial_rng(root: u64, trial: u64) -> Rng {
    rng_from_seed(derive_seed(root, trial))
}
