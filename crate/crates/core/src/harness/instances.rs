use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemInstance;

/// Least favorable configuration: means `(0, ..., 0, delta)`.
pub fn slippage_config(k: usize, delta: f64, variance: f64) -> Result<ProblemInstance> {
    if !(delta > 0.0) {
        return Err(Error::config("instance.delta", format!("must be > 0, got {delta}")));
    }
    let mut means = vec![0.0; k];
    if let Some(last) = means.last_mut() {
        *last = delta;
    }
    ProblemInstance::with_common_variance(means, variance)?.with_iz_delta(delta)
}

/// Means `(0, s, 2s, ..., (k-1)s)`.
pub fn monotone_config(k: usize, spacing: f64, variance: f64) -> Result<ProblemInstance> {
    if !(spacing > 0.0) {
        return Err(Error::config("instance.spacing", format!("must be > 0, got {spacing}")));
    }
    let means = (0..k).map(|i| i as f64 * spacing).collect();
    ProblemInstance::with_common_variance(means, variance)
}

/// All means equal to zero.
pub fn equal_means_config(k: usize, variance: f64) -> Result<ProblemInstance> {
    ProblemInstance::with_common_variance(vec![0.0; k], variance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum InstanceSpec {
    Explicit {
        means: Vec<f64>,
        variances: Vec<f64>,
        delta: Option<f64>,
    },
    Slippage {
        k: usize,
        delta: f64,
        variance: f64,
    },
    EqualMeans {
        k: usize,
        variance: f64,
    },
    Monotone {
        k: usize,
        spacing: f64,
        variance: f64,
    },
}

impl InstanceSpec {
    pub fn build(&self) -> Result<ProblemInstance> {
        match self {
            InstanceSpec::Explicit { means, variances, delta } => {
                let p = ProblemInstance::new(means.clone(), variances.clone())?;
                match delta {
                    Some(d) => p.with_iz_delta(*d),
                    None => Ok(p),
                }
            }
            InstanceSpec::Slippage { k, delta, variance } => slippage_config(*k, *delta, *variance),
            InstanceSpec::EqualMeans { k, variance } => equal_means_config(*k, *variance),
            InstanceSpec::Monotone { k, spacing, variance } => monotone_config(*k, *spacing, *variance),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slippage_examples() {
        assert_eq!(slippage_config(3, 0.2, 1.0).unwrap().means(), &[0.0, 0.0, 0.2]);
        let p = slippage_config(2, 1.0, 1.0).unwrap();
        assert_eq!(p.means(), &[0.0, 1.0]);
        assert_eq!(p.best_indices(), vec![1]);
        let p = slippage_config(6, 0.5, 2.0).unwrap();
        let mut m = p.means().to_vec();
        m.sort_by(f64::total_cmp);
        assert_eq!(m[5] - 0.5, m[4]);
        assert!(slippage_config(3, 0.0, 1.0).is_err());
    }

    #[test]
    fn monotone_examples() {
        let p = monotone_config(4, 1.0, 1.0).unwrap();
        assert_eq!(p.means(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(p.best_indices(), vec![3]);
        let gaps: Vec<f64> = p.means().iter().map(|m| 3.0 - m).collect();
        assert_eq!(gaps, vec![3.0, 2.0, 1.0, 0.0]);
        assert!(monotone_config(4, -1.0, 1.0).is_err());
    }

    #[test]
    fn equal_means_are_all_best() {
        assert_eq!(equal_means_config(3, 1.0).unwrap().best_indices(), vec![0, 1, 2]);
    }
}
