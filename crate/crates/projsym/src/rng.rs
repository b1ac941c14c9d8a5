//! Reproducible randomness.
//!
//! Every random quantity in this crate is drawn from a [`RandomStream`],
//! a ChaCha8 generator addressed by a [`StreamKey`]: a `(seed, stream)`
//! pair. Streams with the same seed but different stream indices are
//! statistically independent, so parallel code can hand one stream to
//! each unit of work and produce output that does not depend on
//! scheduling order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::RealVector;

/// Address of one independent substream: a seed plus a stream index.
///
/// `StreamKey` is plain data. It can be copied freely and shared across
/// threads; only [`StreamKey::open`] materializes generator state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub stream: u64,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// The key `stream + delta` positions further along the same seed.
    pub fn offset(self, delta: u64) -> Self {
        Self {
            seed: self.seed,
            stream: self.stream.wrapping_add(delta),
        }
    }

    pub fn open(self) -> RandomStream {
        RandomStream::open(self)
    }
}

/// A single-owner generator for one substream.
///
/// Never share one instance between units of work; derive a fresh key
/// per unit instead.
#[derive(Debug, Clone)]
pub struct RandomStream {
    key: StreamKey,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn open(key: StreamKey) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(key.seed);
        rng.set_stream(key.stream);
        Self { key, rng }
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// `n` i.i.d. standard normal coordinates, drawn in order.
    pub fn normal_coords(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.standard_normal()).collect()
    }

    /// A standard normal vector in `R^p`.
    pub fn normal_vector(&mut self, p: usize) -> RealVector {
        RealVector::new(self.normal_coords(p)).expect("normal draws are finite and p >= 1")
    }

    pub fn shuffle<T>(&mut self, data: &mut [T]) {
        data.shuffle(&mut self.rng);
    }

    /// Uniform integer in `[0, bound)`.
    pub fn below(&mut self, bound: usize) -> usize {
        self.rng.random_range(0..bound)
    }
}
