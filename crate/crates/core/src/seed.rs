//! Deterministic seed fan-out.
//!
//! Every random decision in the pipeline is driven by a ChaCha8 stream whose
//! seed is derived from one master seed through a splitmix64 chain:
//! `derive(master, &[a, b, ..])` folds each key into the state with
//! `state = splitmix64(state ^ splitmix64(key))`. Sub-seeds depend only on
//! their key path, so a partial re-run (one fold, one repeat) draws exactly
//! the numbers the full run drew for it, and worker count never matters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Key namespaces used under a master seed.
pub mod keys {
    pub const SPLIT: u64 = 1;
    pub const FOLDS: u64 = 2;
    pub const FOREST: u64 = 3;
    pub const TREE: u64 = 4;
    pub const VALIDATION: u64 = 5;
    pub const REPEAT: u64 = 6;
    pub const ROUND: u64 = 7;
}

pub const fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a sub-seed from `master` along a key path.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |state, &key| splitmix64(state ^ splitmix64(key)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
