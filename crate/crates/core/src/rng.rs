//! Named random substreams derived from one run seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used for dataset splits.
pub const SPLIT: &str = "split";
/// Stream used for selection among equally good trees.
pub const SELECT: &str = "select";
/// Stream used for solver seeds.
pub const SOLVER: &str = "solver";
/// Stream used for selection/test re-splits.
pub const RESPLIT: &str = "resplit";

/// A generator keyed by `(seed, name)`; the same pair always yields the same
/// sequence and distinct names are independent.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, name))
}

/// A 64-bit seed derived from `(seed, name)`.
pub fn derive_seed(seed: u64, name: &str) -> u64 {
    mix(seed, name)
}

fn mix(seed: u64, name: &str) -> u64 {
    // FNV-1a over the name, then a splitmix64 finalizer with the seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = h ^ seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
