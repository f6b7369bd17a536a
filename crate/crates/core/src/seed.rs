//! Seed derivation. Every random stream in the crate descends from one
//! master seed; sub-seeds for independent roles (signal vs. shot-noise
//! ensembles, sweep rows) are mixed with SplitMix64.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the sub-stream `tag` of `master`.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag))
}

/// Generator for frame `index` under `seed`; each index is a separate
/// ChaCha stream so frames can be produced in any order.
pub fn frame_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
