//! Seeded, splittable randomness.
//!
//! Every randomized operation takes a [`RandomSeed`]. A seed is a pair
//! `(seed, stream)` mapped onto a ChaCha8 keystream: the 64-bit `seed` is
//! expanded into the 256-bit key with `rand_core`'s `seed_from_u64` (PCG32
//! expansion) and `stream` selects the ChaCha stream id. The generator is
//! counter based, so output depends only on `(seed, stream)` and never on the
//! platform, thread count or the order in which substreams are consumed.
//!
//! Substreams are derived with [`RandomSeed::derive`], which mixes a label into
//! the stream id with splitmix64. Trials, pairs and rounds each get their own
//! label so that parallel execution is order independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type Rng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSeed {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RandomSeed {
    pub const fn new(seed: u64) -> Self {
        RandomSeed { seed, stream: 0 }
    }

    pub const fn with_stream(seed: u64, stream: u64) -> Self {
        RandomSeed { seed, stream }
    }

    /// Child seed for the substream identified by `label`.
    pub fn derive(&self, label: u64) -> RandomSeed {
        RandomSeed {
            seed: self.seed,
            stream: splitmix64(splitmix64(self.stream) ^ label.wrapping_mul(0xD6E8_FEB8_6659_FD93)),
        }
    }

    pub fn rng(&self) -> Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

impl From<u64> for RandomSeed {
    fn from(seed: u64) -> Self {
        RandomSeed::new(seed)
    }
}
