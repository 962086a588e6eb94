//! Seeded random streams. Every consumer derives its generator from the run
//! seed plus a fixed stream tag, so results do not depend on call order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Deterministic child seed, used where a seed is handed to another component.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) mod streams {
    pub const SUBSET: u64 = 1;
    pub const ROW_SAMPLE: u64 = 2;
    pub const COL_SAMPLE: u64 = 3;
    pub const UNDER: u64 = 4;
    pub const OVER: u64 = 5;
    pub const FOLDS: u64 = 6;
    pub const SEARCH: u64 = 7;
    pub const SYNTH: u64 = 8;
}
