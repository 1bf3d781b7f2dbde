//! Deterministic seed splitting.
//!
//! A derived seed is a SplitMix64 chain over the master seed and a list of
//! integer keys (experiment id, size, realization, ...). Distinct key lists
//! give statistically independent ChaCha streams.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub const EXPERIMENT_DISCRETENESS: u64 = 1;
pub const EXPERIMENT_FINITE_SIZE: u64 = 2;
pub const EXPERIMENT_SURROGATE: u64 = 3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(splitmix64(master), |h, &k| splitmix64(h ^ splitmix64(k)))
}

/// FNV-1a, for turning identifiers into seed keys.
pub fn key_of(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}
