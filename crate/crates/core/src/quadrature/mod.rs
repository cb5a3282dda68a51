//! Integration engines.
//!
//! Two families: deterministic adaptive 1-D quadrature for radial reductions
//! ([`integrate_radial`]), and seeded importance-sampled Monte Carlo for
//! general R^N and R^{2N} integrals with singular weights ([`integrate_mc`],
//! [`gagliardo_mc`]). Monte Carlo results are a pure function of
//! `(integrand, seed, sample_count)`: per-sample counter-based random streams
//! plus order-insensitive pairwise reduction make them bit-identical across
//! thread counts.

mod estimate;
mod gagliardo;
mod mc;
mod radial;
mod rng;

pub use estimate::{pairwise_sum, Estimate, Method};
pub use gagliardo::{gagliardo_mc, GagliardoImportance};
pub use mc::{integrate_mc, Importance};
pub use radial::{integrate_1d, integrate_log_axis, integrate_radial};

/// Seeded generator on the distribution-sampling stream family, for serial
/// hit-counting samplers outside this module.
pub fn distribution_stream(seed: u64) -> rand_chacha::ChaCha8Rng {
    rng::SampleStreams::new(seed, rng::SALT_DISTRIBUTION).stream(0)
}

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Monte Carlo configuration. Identical configs give identical results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub sample_count: u64,
    /// Domain cutoff for infinite-support integrands.
    pub truncation_radius: f64,
    /// Inner/outer stratification boundary at the origin and on the diagonal.
    pub singular_split_radius: f64,
}

impl McConfig {
    /// Desk-scale defaults: 2e5 samples for N=2, 1e6 for N=3 and above.
    pub fn default_for(dim: usize) -> Self {
        McConfig {
            seed: 0x5eed,
            sample_count: if dim <= 2 { 200_000 } else { 1_000_000 },
            truncation_radius: 8.0,
            singular_split_radius: 0.5,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n: u64) -> Self {
        self.sample_count = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count < 1000 {
            return Err(Error::ConstraintViolation {
                name: "sample_count",
                value: self.sample_count as f64,
                bound: "sample_count >= 1000".into(),
            });
        }
        if !(self.singular_split_radius > 0.0
            && self.truncation_radius > self.singular_split_radius)
        {
            return Err(Error::ConstraintViolation {
                name: "radii",
                value: self.singular_split_radius,
                bound: "truncation_radius > singular_split_radius > 0".into(),
            });
        }
        Ok(())
    }
}

/// Maximum spatial dimension supported by the Monte Carlo samplers (the
/// exponent algebra itself goes up to N = 64).
pub const MAX_MC_DIM: usize = 8;
