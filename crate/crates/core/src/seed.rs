//! Counter-based seed derivation.
//!
//! Every random quantity in a campaign is drawn from its own ChaCha stream
//! whose seed is a pure function of `(master_seed, path...)`. Trials, nodes
//! and purposes therefore never share generator state, and any subset of
//! trials can be replayed or run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream purpose tags used as the second path element under a trial seed.
pub mod tag {
    pub const OCCUPANCY: u64 = 1;
    pub const LEVELS: u64 = 2;
    pub const CHANNEL: u64 = 3;
    pub const MIXING: u64 = 4;
    pub const NOISE: u64 = 5;
    pub const PILOT: u64 = 6;
    pub const TEXTURE: u64 = 7;
    pub const TONES: u64 = 8;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a path of counters.
///
/// Path elements are hashed in order, so `[1, 2]` and `[2, 1]` give
/// unrelated seeds.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p.rotate_left(17) ^ 0xD6E8_FEB8_6659_FD93)))
}

pub fn stream(seed: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive(seed, path))
}
