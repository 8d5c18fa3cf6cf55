//! Seed derivation for reproducible ensembles.
//!
//! Every random quantity is drawn from a ChaCha8 stream. A realization seed is
//! a SplitMix64 hash of the sweep coordinates, so any worker can compute it
//! without coordination.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used for single-particle energies.
pub const SP_STREAM: u64 = 0;
/// Stream used for two-body coefficients.
pub const TWO_BODY_STREAM: u64 = 1;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash an ordered list of keys into one seed.
pub fn derive(keys: &[u64]) -> u64 {
    keys.iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &k| mix64(acc ^ mix64(k)))
}

/// Seed for realization `realization` at grid point `v_index` of a sweep.
pub fn realization_seed(base_seed: u64, v_index: u64, realization: u64) -> u64 {
    derive(&[base_seed, v_index, realization])
}

/// A generator positioned at the start of `stream` for `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
