//! Reproducible random streams.
//!
//! A stream is identified by `(seed, stream_id)`. The generator is ChaCha8 keyed from the
//! seed, with the ChaCha stream counter set to `stream_id`. Distinct ids therefore select
//! non-overlapping keystreams under the same key. The sequence is fixed across platforms.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::num::Real;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream with the same seed and a different id.
    pub fn sibling(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn unit<T: Real>(&mut self) -> T {
        T::unit_from_bits(self.next_u64())
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    pub fn unit_open_left<T: Real>(&mut self) -> T {
        T::one() - self.unit::<T>()
    }
}

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial_index` under `master_seed`:
/// `mix64(master_seed + (trial_index + 1)·0x9E3779B97F4A7C15)` (wrapping arithmetic).
pub fn trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    mix64(master_seed.wrapping_add(trial_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}
