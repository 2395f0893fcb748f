use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FHN_BUDGET_CAP: u64 = 1_000_000;

/// Which sample variance of the paired differences FHN's boundary uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FhnVariance {
    /// Re-estimated from all `n` paired observations every round.
    #[default]
    Full,
    /// Estimated once from the first `n0` pairs.
    FirstStage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPrecisionConfig {
    pub alpha: f64,
    pub delta: Option<f64>,
    pub n0: u64,
    pub lambda: Option<f64>,
    /// Total observations after which a sequential procedure gives up.
    pub budget_cap: Option<u64>,
    pub fhn_variance: FhnVariance,
}

impl FixedPrecisionConfig {
    pub fn new(alpha: f64, n0: u64) -> Self {
        Self {
            alpha,
            delta: None,
            n0,
            lambda: None,
            budget_cap: None,
            fhn_variance: FhnVariance::Full,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_budget_cap(mut self, cap: u64) -> Self {
        self.budget_cap = Some(cap);
        self
    }

    pub fn with_fhn_variance(mut self, v: FhnVariance) -> Self {
        self.fhn_variance = v;
        self
    }

    /// Checks `0 < alpha < 1 - 1/k` and `n0 >= min_n0`.
    pub fn validate(&self, k: usize, min_n0: u64) -> Result<()> {
        if k < 2 {
            return Err(Error::config("k", format!("need at least 2 alternatives, got {k}")));
        }
        let upper = 1.0 - 1.0 / k as f64;
        if !(self.alpha > 0.0 && self.alpha < upper) {
            return Err(Error::config(
                "procedure.alpha",
                format!("must lie in (0, {upper}), got {}", self.alpha),
            ));
        }
        if self.n0 < min_n0 {
            return Err(Error::config(
                "procedure.n0",
                format!("must be at least {min_n0}, got {}", self.n0),
            ));
        }
        if let Some(d) = self.delta {
            check_delta(d)?;
        }
        Ok(())
    }

    pub fn require_delta(&self) -> Result<f64> {
        let d = self
            .delta
            .ok_or_else(|| Error::config("procedure.delta", "required by this procedure"))?;
        check_delta(d)?;
        Ok(d)
    }

    /// `lambda` with `0 < lambda < delta`.
    pub fn require_lambda(&self, delta: f64) -> Result<f64> {
        let l = self
            .lambda
            .ok_or_else(|| Error::config("procedure.lambda", "required by this procedure"))?;
        if !(l > 0.0 && l < delta) {
            return Err(Error::config(
                "procedure.lambda",
                format!("must lie in (0, delta = {delta}), got {l}"),
            ));
        }
        Ok(l)
    }
}

fn check_delta(d: f64) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::config("procedure.delta", format!("must be > 0, got {d}")));
    }
    Ok(())
}
