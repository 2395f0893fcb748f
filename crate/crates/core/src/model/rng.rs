//! Counter-based random streams.
//!
//! The `n`-th draw of a stream is a hash of `(seed, substream, n)`, so the
//! value an observation receives does not depend on which thread takes it or
//! in what order streams are interleaved.

use crate::numerics::acklam;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child of `seed` (e.g. one per macro-replication).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ 0x6A09_E667_F3BC_C909).wrapping_add(mix64(index.wrapping_add(GAMMA))))
}

/// Stream feeding observation `obs` of the alternative mapped to `substream`.
/// Each observation owns a stream, so oracles may consume any number of draws.
pub fn observation_stream(seed: u64, substream: u64, obs: u64) -> RandomStream {
    RandomStream::new(derive_seed(seed, substream), obs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    seed: u64,
    substream: u64,
    key: u64,
    counter: u64,
}

impl RandomStream {
    pub fn new(seed: u64, substream: u64) -> Self {
        Self::at(seed, substream, 0)
    }

    /// Stream positioned so that the next draw is draw number `counter`.
    pub fn at(seed: u64, substream: u64, counter: u64) -> Self {
        let key = mix64(mix64(seed).wrapping_add(GAMMA) ^ mix64(substream ^ 0xD1B5_4A32_D192_ED03));
        Self {
            seed,
            substream,
            key,
            counter,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self) -> u64 {
        self.substream
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = mix64(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)));
        self.counter += 1;
        out
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by inverse-cdf transform of one uniform.
    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        acklam(self.next_uniform())
    }

    pub fn next_exponential(&mut self, rate: f64) -> f64 {
        -self.next_uniform().ln() / rate
    }
}
