//! Counter-based per-sample random streams.
//!
//! Each Monte Carlo sample draws from its own ChaCha stream, indexed by
//! engine salt and sample number. Streams are independent of execution order
//! and thread count, so parallel reductions reproduce exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Engine salts keep distinct integral kinds on distinct stream families.
pub(crate) const SALT_MC: u64 = 1;
pub(crate) const SALT_GAGLIARDO: u64 = 2;
pub(crate) const SALT_DISTRIBUTION: u64 = 3;

const SAMPLE_BITS: u32 = 48;

pub(crate) struct SampleStreams {
    base: ChaCha8Rng,
    salt: u64,
}

impl SampleStreams {
    pub fn new(seed: u64, salt: u64) -> Self {
        SampleStreams {
            base: ChaCha8Rng::seed_from_u64(seed),
            salt,
        }
    }

    /// Fresh generator for sample `index`, independent of all other samples.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        debug_assert!(index < 1 << SAMPLE_BITS);
        let mut rng = self.base.clone();
        rng.set_stream((self.salt << SAMPLE_BITS) | index);
        rng
    }
}
