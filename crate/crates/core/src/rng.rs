//! Seeded random number generation.
//!
//! Every random draw in the crate goes through [`seeded`], a ChaCha20 stream
//! cipher generator keyed by `seed_from_u64`. Sub-seeds (per trial, per
//! restart) are derived with SplitMix64 so that results do not depend on the
//! order in which parallel workers pick up their jobs.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Identifier printed in every report that consumed randomness.
pub const GENERATOR_ID: &str = "chacha20(rand_chacha-0.3,seed_from_u64)+splitmix64-derive";

pub type DetRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> DetRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for job `index` under master seed `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}
