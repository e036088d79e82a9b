//! Seeded, splittable random streams.
//!
//! Every stochastic routine takes an explicit `u64` seed. Child seeds are
//! derived with a SplitMix64 mix so that independent sub-tasks (periods,
//! replications, multistarts) get decorrelated streams regardless of the
//! order in which they execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of child stream `stream` from `seed`.
pub fn split(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_mul(0xD1B5_4A32_D192_ED03)))
}

/// Derive a child seed from a path of stream ids.
pub fn split_path(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &p| split(s, p))
}
