//! Counter-based seed derivation.
//!
//! Every random draw in the simulator comes from a ChaCha stream whose seed is
//! a pure function of the master seed and a path of integer keys (cell, phase,
//! slot, link, ...). Draw order across workers therefore never affects the
//! realized values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout the crate.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A node in the seed derivation tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamSeed(u64);

impl StreamSeed {
    pub fn new(master: u64) -> Self {
        StreamSeed(splitmix64(master))
    }

    /// Child seed for `key`. Distinct keys give unrelated children.
    pub fn derive(self, key: u64) -> Self {
        StreamSeed(splitmix64(self.0 ^ splitmix64(key.wrapping_mul(GOLDEN))))
    }

    pub fn rng(self) -> SimRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    pub fn value(self) -> u64 {
        self.0
    }
}
