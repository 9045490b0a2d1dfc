//! Seeding for reproducible ensembles.
//!
//! All randomness comes from ChaCha8, a counter-based generator: a master
//! seed fixes the key and every sample index selects its own stream, so
//! sample `i` draws the same numbers no matter which worker runs it or in
//! what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator used for every stream in the crate.
pub type StreamRng = ChaCha8Rng;

/// A master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    /// The stream for sample `index`.
    pub fn stream(self, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }

    /// An independent master seed for a sub-task, e.g. graph generation vs.
    /// sampling, or one size of a size sweep.
    pub fn derive(self, tag: u64) -> Seed {
        Seed(splitmix64(
            self.0 ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d)),
        ))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
