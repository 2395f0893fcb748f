use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::evaluate::{replicate, EvalReport, ExperimentConfig};
use crate::error::{Error, Result};
use crate::model::RunningStat;
use crate::numerics::special::ln_gamma;

/// `P(X >= successes)` for `X ~ Binomial(trials, 1/2)`, summed in log space.
pub fn sign_test_upper(successes: u64, trials: u64) -> f64 {
    if successes == 0 {
        return 1.0;
    }
    if successes > trials {
        return 0.0;
    }
    let n = trials as f64;
    let ln_half_n = -n * std::f64::consts::LN_2;
    let ln_n1 = ln_gamma(n + 1.0);
    let terms: Vec<f64> = (successes..=trials)
        .map(|x| {
            let x = x as f64;
            ln_n1 - ln_gamma(x + 1.0) - ln_gamma(n - x + 1.0) + ln_half_n
        })
        .collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.iter().map(|t| (t - top).exp()).sum();
    (top + s.ln()).exp().min(1.0)
}

/// Paired comparison of two procedures on common random numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedReport {
    pub a: EvalReport,
    pub b: EvalReport,
    /// Replications where only `a` selected correctly.
    pub only_a_correct: u64,
    pub only_b_correct: u64,
    /// One-sided sign test p-value for "a has higher PCS than b".
    pub pcs_p_value: f64,
    /// Replications where `a` used strictly fewer samples.
    pub a_fewer_samples: u64,
    pub b_fewer_samples: u64,
    /// One-sided sign test p-value for "a uses fewer samples than b".
    pub samples_p_value: f64,
    /// Mean of `N_a - N_b` with its standard error.
    pub mean_n_diff: f64,
    pub mean_n_diff_se: f64,
}

/// Runs both experiments with the same replication seeds. Both must share
/// the instance, replication count and seed.
pub fn compare(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<PairedReport> {
    if a.instance != b.instance {
        return Err(Error::config("instance", "paired comparison needs identical instances"));
    }
    if a.replications != b.replications {
        return Err(Error::config("harness.replications", "paired comparison needs equal replication counts"));
    }
    if a.seed != b.seed {
        return Err(Error::config("harness.seed", "paired comparison needs a common seed"));
    }
    let t = Instant::now();
    let ra = replicate(a)?;
    let ta = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let rb = replicate(b)?;
    let tb = t.elapsed().as_secs_f64();

    let mut only_a = 0;
    let mut only_b = 0;
    let mut a_fewer = 0;
    let mut b_fewer = 0;
    let mut diff = RunningStat::new();
    for (x, y) in ra.iter().zip(&rb) {
        match (x.correct, y.correct) {
            (true, false) => only_a += 1,
            (false, true) => only_b += 1,
            _ => {}
        }
        if x.samples < y.samples {
            a_fewer += 1;
        } else if y.samples < x.samples {
            b_fewer += 1;
        }
        diff.push(x.samples as f64 - y.samples as f64);
    }
    Ok(PairedReport {
        a: EvalReport::from_replications(a, &ra, ta),
        b: EvalReport::from_replications(b, &rb, tb),
        only_a_correct: only_a,
        only_b_correct: only_b,
        pcs_p_value: sign_test_upper(only_a, only_a + only_b),
        a_fewer_samples: a_fewer,
        b_fewer_samples: b_fewer,
        samples_p_value: sign_test_upper(a_fewer, a_fewer + b_fewer),
        mean_n_diff: diff.mean(),
        mean_n_diff_se: diff.variance().map_or(0.0, |v| (v / diff.count() as f64).sqrt()),
    })
}
