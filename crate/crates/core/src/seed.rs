//! Deterministic seed derivation.
//!
//! Every random quantity in the toolkit is drawn from a ChaCha stream keyed by
//! a [`Seed`]. Sub-seeds are derived by hashing the parent value with a stream
//! label (and optionally an index), so independent purposes never share a
//! stream and a change in one parameter does not shift the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn new(master: u64) -> Self {
        Seed(master)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Sub-seed for a named stream.
    pub fn derive(self, label: &str) -> Seed {
        Seed(splitmix64(self.0 ^ fnv1a(label.as_bytes())))
    }

    /// Sub-seed for the `index`-th member of a named family (trials, points, restarts).
    pub fn derive_indexed(self, label: &str, index: u64) -> Seed {
        let base = self.derive(label).0;
        Seed(splitmix64(base ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d))))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
