use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{argmax, Sampler, SelectionResult, Termination};
use crate::numerics::{normal_cdf, normal_pdf};

pub const DIFFUSE_PRIOR_PRECISION: f64 = 1e-6;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `zeta Phi(zeta) + phi(zeta)`.
pub fn kg_factor(zeta: f64) -> f64 {
    zeta * normal_cdf(zeta) + normal_pdf(zeta)
}

/// `ln(kg_factor(-x))` for `x >= 0`, without cancellation or underflow.
fn ln_kg_factor_neg(x: f64) -> f64 {
    if x < 10.0 {
        return kg_factor(-x).ln();
    }
    // phi(x) (1 - x R(x)) with R the Mills ratio, by its asymptotic series.
    let z = 1.0 / (x * x);
    let series = z * (1.0 - z * (3.0 - z * (15.0 - z * (105.0 - z * 945.0))));
    -0.5 * x * x - LN_SQRT_2PI + series.ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KgPrior {
    /// Mean 0 and precision [`DIFFUSE_PRIOR_PRECISION`] for every alternative.
    Diffuse,
    Explicit { means: Vec<f64>, variances: Vec<f64> },
}

/// Independent normal beliefs about the means with known sampling precision.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    mean: Vec<f64>,
    precision: Vec<f64>,
    sample_precision: f64,
}

impl PosteriorState {
    pub fn new(prior: &KgPrior, k: usize, sampling_variance: f64) -> Result<Self> {
        if !(sampling_variance > 0.0 && sampling_variance.is_finite()) {
            return Err(Error::config(
                "procedure.variance",
                format!("must be > 0, got {sampling_variance}"),
            ));
        }
        let (mean, precision) = match prior {
            KgPrior::Diffuse => (vec![0.0; k], vec![DIFFUSE_PRIOR_PRECISION; k]),
            KgPrior::Explicit { means, variances } => {
                if means.len() != k || variances.len() != k {
                    return Err(Error::LengthMismatch(means.len().max(variances.len()), k));
                }
                if variances.iter().any(|v| !(*v >= 0.0)) {
                    return Err(Error::config("procedure.prior_variances", "must be >= 0"));
                }
                (means.clone(), variances.iter().map(|v| 1.0 / v).collect())
            }
        };
        Ok(Self {
            mean,
            precision,
            sample_precision: 1.0 / sampling_variance,
        })
    }

    pub fn means(&self) -> &[f64] {
        &self.mean
    }

    pub fn precisions(&self) -> &[f64] {
        &self.precision
    }

    /// Standard deviation of the change in alternative `i`'s posterior mean
    /// from one more sample.
    pub fn sigma_tilde(&self, i: usize) -> f64 {
        let b = self.precision[i];
        if b.is_infinite() {
            return 0.0;
        }
        (1.0 / b - 1.0 / (b + self.sample_precision)).max(0.0).sqrt()
    }

    fn zeta(&self, i: usize) -> f64 {
        let rival = (0..self.mean.len())
            .filter(|&j| j != i)
            .map(|j| self.mean[j])
            .fold(f64::NEG_INFINITY, f64::max);
        -((self.mean[i] - rival) / self.sigma_tilde(i)).abs()
    }

    /// Knowledge-gradient value of sampling alternative `i`.
    pub fn kg_value(&self, i: usize) -> f64 {
        let st = self.sigma_tilde(i);
        if st == 0.0 {
            return 0.0;
        }
        st * kg_factor(self.zeta(i))
    }

    fn ln_kg_value(&self, i: usize) -> f64 {
        let st = self.sigma_tilde(i);
        if st == 0.0 {
            return f64::NEG_INFINITY;
        }
        st.ln() + ln_kg_factor_neg(-self.zeta(i))
    }

    /// Alternative with the largest KG value, lowest index on ties.
    pub fn choose(&self) -> usize {
        let v: Vec<f64> = (0..self.mean.len()).map(|i| self.ln_kg_value(i)).collect();
        argmax(&v)
    }

    /// Bayesian update after observing `y` from alternative `i`.
    pub fn update(&mut self, i: usize, y: f64) {
        let b = self.precision[i];
        if b.is_infinite() {
            return;
        }
        let nb = b + self.sample_precision;
        self.mean[i] = (b * self.mean[i] + self.sample_precision * y) / nb;
        self.precision[i] = nb;
    }
}

/// Knowledge gradient with known common sampling variance: `total` single
/// samples, then the largest posterior mean.
pub fn kg(
    total: u64,
    sampling_variance: f64,
    prior: &KgPrior,
    sampler: &mut Sampler,
) -> Result<SelectionResult> {
    let k = sampler.k();
    if total < 1 {
        return Err(Error::config("procedure.budget", "must be at least 1"));
    }
    let mut state = PosteriorState::new(prior, k, sampling_variance)?;
    for _ in 0..total {
        let z = state.choose();
        let y = sampler.draw(z);
        state.update(z, y);
    }
    Ok(SelectionResult::new(argmax(state.means()), sampler.counts(), Termination::Decision))
}
