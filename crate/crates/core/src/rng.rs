//! Seeded, splittable random streams.
//!
//! Nothing in the crate touches a global RNG: every random draw comes from a
//! [`SimRng`] derived from an explicit seed, and independent sub-computations
//! receive independent streams via [`SeedStream::stream`] / [`SeedStream::split`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for stream `index` of this seed.
    pub fn stream(&self, index: u64) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// A child seed that is independent of `self` and of other labels.
    pub fn split(&self, label: u64) -> SeedStream {
        SeedStream { seed: splitmix64(self.seed ^ splitmix64(label.wrapping_add(1))) }
    }
}

pub fn seeded(seed: u64) -> SimRng {
    SeedStream::new(seed).stream(0)
}
