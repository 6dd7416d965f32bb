//! Seeded, splittable random streams.
//!
//! Realization `i` of an ensemble draws from `child_seed(seed_base, i)`, so
//! results do not depend on how realizations are scheduled. Within one
//! realization, independent purposes (heating circuit, cooling proposals, …)
//! use separate ChaCha streams of the same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream identifiers used within a realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Heating = 0,
    Cooling = 1,
    TLayer = 2,
    Scramble = 3,
}

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

/// Seed of realization `index` under `seed_base` (splitmix64 finaliser over
/// both inputs).
pub fn child_seed(seed_base: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed_base) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
