use super::instance::ProblemInstance;
use super::rng::{observation_stream, RandomStream};
use crate::error::{Error, Result};

/// Source of observations. Procedures see the alternatives only through this
/// trait; observations of one alternative must be i.i.d. for a fixed stream.
pub trait SamplingOracle: Send + Sync {
    fn k(&self) -> usize;

    /// One observation of alternative `alt` drawn from `stream`.
    fn sample(&self, alt: usize, stream: &mut RandomStream) -> f64;
}

/// Independent `N(mu_i, sigma_i^2)` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianOracle {
    instance: ProblemInstance,
    sd: Vec<f64>,
}

impl GaussianOracle {
    pub fn new(instance: ProblemInstance) -> Self {
        let sd = instance.variances().iter().map(|v| v.sqrt()).collect();
        Self { instance, sd }
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }
}

impl SamplingOracle for GaussianOracle {
    fn k(&self) -> usize {
        self.instance.k()
    }

    #[inline]
    fn sample(&self, alt: usize, stream: &mut RandomStream) -> f64 {
        self.instance.means()[alt] + self.sd[alt] * stream.next_normal()
    }
}

/// Checked single draw from the Gaussian model of `instance`.
pub fn gaussian_sample(
    instance: &ProblemInstance,
    alt: usize,
    stream: &mut RandomStream,
) -> Result<f64> {
    if alt >= instance.k() {
        return Err(Error::IndexOutOfRange {
            index: alt,
            k: instance.k(),
        });
    }
    Ok(instance.means()[alt] + instance.variances()[alt].sqrt() * stream.next_normal())
}

/// Per-replication view of an oracle: observation `l` of alternative `i` is
/// drawn from `observation_stream(seed, substreams[i], l)`.
pub struct Sampler<'a> {
    oracle: &'a dyn SamplingOracle,
    seed: u64,
    substreams: Vec<u64>,
    counts: Vec<u64>,
}

impl<'a> Sampler<'a> {
    /// Alternative `i` reads substream `i` of `seed`.
    pub fn new(oracle: &'a dyn SamplingOracle, seed: u64) -> Self {
        let substreams: Vec<u64> = (0..oracle.k() as u64).collect();
        Self::with_substreams(oracle, seed, &substreams)
    }

    /// Alternative `i` reads substream `substreams[i]`.
    pub fn with_substreams(oracle: &'a dyn SamplingOracle, seed: u64, substreams: &[u64]) -> Self {
        assert_eq!(substreams.len(), oracle.k(), "one substream per alternative");
        Self {
            oracle,
            seed,
            substreams: substreams.to_vec(),
            counts: vec![0; substreams.len()],
        }
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn oracle(&self) -> &'a dyn SamplingOracle {
        self.oracle
    }

    #[inline]
    pub fn draw(&mut self, alt: usize) -> f64 {
        let mut s = self.ticket(alt);
        self.oracle.sample(alt, &mut s)
    }

    pub fn draw_n(&mut self, alt: usize, n: u64) -> Vec<f64> {
        (0..n).map(|_| self.draw(alt)).collect()
    }

    /// Stream of the next observation of `alt`, for evaluation elsewhere (a
    /// worker). The observation counts as taken.
    pub fn ticket(&mut self, alt: usize) -> RandomStream {
        let obs = self.counts[alt];
        self.counts[alt] += 1;
        observation_stream(self.seed, self.substreams[alt], obs)
    }

    pub fn taken(&self, alt: usize) -> u64 {
        self.counts[alt]
    }

    pub fn counts(&self) -> Vec<u64> {
        self.counts.clone()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}
