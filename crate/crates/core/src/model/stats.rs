use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-pass count, mean and sum of squared deviations (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStat {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStat {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        xs.iter().fold(Self::new(), |s, &x| welford_update(s, x))
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn sum(&self) -> f64 {
        self.mean * self.n as f64
    }

    /// Unbiased sample variance; an error below two observations.
    pub fn variance(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::InsufficientSamples(self.n));
        }
        Ok(self.m2 / (self.n - 1) as f64)
    }
}

pub fn welford_update(mut stat: RunningStat, x: f64) -> RunningStat {
    stat.push(x);
    stat
}

/// `S²_ji`: sample variance of the paired differences `X_jl - X_il`.
pub fn pairwise_variance(obs_j: &[f64], obs_i: &[f64]) -> Result<f64> {
    if obs_j.len() != obs_i.len() {
        return Err(Error::LengthMismatch(obs_j.len(), obs_i.len()));
    }
    let mut diff = RunningStat::new();
    for (x, y) in obs_j.iter().zip(obs_i) {
        diff.push(x - y);
    }
    diff.variance()
}
