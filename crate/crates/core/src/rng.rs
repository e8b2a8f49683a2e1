//! Seeded, position-addressable random streams.
//!
//! Every random draw in the pipeline comes from a ChaCha8 generator keyed by
//! the master seed, with the stream id derived from a purpose tag and the
//! coordinates of the job (split index, noise count, trial index). A job's
//! stream depends only on those coordinates, so results are identical under
//! any parallel schedule and on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for stream derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Noise = 1,
    Split = 2,
    Curve = 3,
    Plant = 4,
    Fixture = 5,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes a seed with a list of coordinates into a new 64-bit seed.
pub fn derive_seed(seed: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(seed), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

/// Generator for the job identified by `(purpose, coords)` under `seed`.
pub fn stream(seed: u64, purpose: Purpose, coords: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(derive_seed(purpose as u64, coords));
    rng
}
