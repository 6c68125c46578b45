//! Seed derivation helpers.
//!
//! Every stochastic component takes an explicit `u64` seed. When one base
//! seed has to drive several independent streams (topology generation,
//! learning dynamics, replication fan-out), we derive sub-seeds with a
//! splitmix64 step so the streams are decorrelated but fully reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer (Steele, Lea, Flood 2014).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed from `(base, salt)`.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    splitmix64(base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// The RNG used throughout the crate. ChaCha8 is seed-stable across
/// platforms, which the determinism contracts rely on.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
