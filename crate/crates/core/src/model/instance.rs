use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground truth for a synthetic selection problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct ProblemInstance {
    means: Vec<f64>,
    variances: Vec<f64>,
    iz_delta: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    means: Vec<f64>,
    variances: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    iz_delta: Option<f64>,
}

impl TryFrom<RawInstance> for ProblemInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        let inst = ProblemInstance::new(raw.means, raw.variances)?;
        match raw.iz_delta {
            Some(d) => inst.with_iz_delta(d),
            None => Ok(inst),
        }
    }
}

impl From<ProblemInstance> for RawInstance {
    fn from(p: ProblemInstance) -> Self {
        RawInstance {
            means: p.means,
            variances: p.variances,
            iz_delta: p.iz_delta,
        }
    }
}

impl ProblemInstance {
    pub fn new(means: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::config("means", "need at least 2 alternatives"));
        }
        if means.len() != variances.len() {
            return Err(Error::LengthMismatch(means.len(), variances.len()));
        }
        if let Some(m) = means.iter().find(|m| !m.is_finite()) {
            return Err(Error::config("means", format!("non-finite mean {m}")));
        }
        if let Some(v) = variances.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::config("variances", format!("variances must be > 0, got {v}")));
        }
        Ok(Self {
            means,
            variances,
            iz_delta: None,
        })
    }

    pub fn with_common_variance(means: Vec<f64>, variance: f64) -> Result<Self> {
        let variances = vec![variance; means.len()];
        Self::new(means, variances)
    }

    pub fn with_iz_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::config("delta", format!("must be > 0, got {delta}")));
        }
        self.iz_delta = Some(delta);
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn iz_delta(&self) -> Option<f64> {
        self.iz_delta
    }

    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn worst_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// All maximizers of the mean; any of them is a correct selection.
    pub fn best_indices(&self) -> Vec<usize> {
        let best = self.best_mean();
        (0..self.k()).filter(|&i| self.means[i] == best).collect()
    }

    pub fn is_correct(&self, selected: usize) -> bool {
        self.means[selected] == self.best_mean()
    }

    /// Within the indifference zone of the best: `mu_selected > mu_best - delta`.
    pub fn is_good(&self, selected: usize, delta: f64) -> bool {
        self.means[selected] > self.best_mean() - delta
    }

    /// Common variance when all alternatives share one.
    pub fn common_variance(&self) -> Option<f64> {
        let v = self.variances[0];
        self.variances.iter().all(|&x| x == v).then_some(v)
    }

    /// Instance whose alternative `i` is alternative `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k() {
            return Err(Error::LengthMismatch(perm.len(), self.k()));
        }
        let means = perm.iter().map(|&p| self.means[p]).collect();
        let variances = perm.iter().map(|&p| self.variances[p]).collect();
        let mut out = Self::new(means, variances)?;
        out.iz_delta = self.iz_delta;
        Ok(out)
    }
}
