use super::config::FixedPrecisionConfig;
use crate::error::{Error, Result};
use crate::model::{argmax, RunningStat, Sampler, SelectionResult, Termination};
use crate::numerics::{bechhofer_h, rinott_h};

/// Common sample size `ceil(2 h^2 sigma^2 / delta^2)`, at least 1.
pub fn bechhofer_sample_size(k: usize, variance: f64, delta: f64, alpha: f64) -> Result<u64> {
    if !(variance > 0.0) {
        return Err(Error::config("variance", format!("must be > 0, got {variance}")));
    }
    if !(delta > 0.0) {
        return Err(Error::config("procedure.delta", format!("must be > 0, got {delta}")));
    }
    let h = bechhofer_h(k, alpha)?;
    let n = (2.0 * h * h * variance / (delta * delta)).ceil();
    Ok((n as u64).max(1))
}

/// Single stage with known common variance: `n` observations each, pick the
/// largest sample mean.
pub fn bechhofer(
    variance: f64,
    config: &FixedPrecisionConfig,
    sampler: &mut Sampler,
) -> Result<SelectionResult> {
    let k = sampler.k();
    config.validate(k, 0)?;
    let delta = config.require_delta()?;
    let n = bechhofer_sample_size(k, variance, delta, config.alpha)?;
    let means: Vec<f64> = (0..k)
        .map(|i| RunningStat::from_slice(&sampler.draw_n(i, n)).mean())
        .collect();
    Ok(SelectionResult::new(argmax(&means), sampler.counts(), Termination::Decision))
}

/// `max{n0, ceil(h^2 s2 / delta^2)}`.
pub fn rinott_sample_size(h: f64, s2: f64, delta: f64, n0: u64) -> u64 {
    let n = (h * h * s2 / (delta * delta)).ceil();
    (n as u64).max(n0)
}

pub fn rinott(config: &FixedPrecisionConfig, sampler: &mut Sampler) -> Result<SelectionResult> {
    let k = sampler.k();
    config.validate(k, 2)?;
    let delta = config.require_delta()?;
    let h = rinott_h(k, config.n0, config.alpha)?;
    let n0 = config.n0;
    let mut means = Vec::with_capacity(k);
    for i in 0..k {
        let mut stat = RunningStat::from_slice(&sampler.draw_n(i, n0));
        let n_i = rinott_sample_size(h, stat.variance()?, delta, n0);
        for _ in n0..n_i {
            stat.push(sampler.draw(i));
        }
        means.push(stat.mean());
    }
    Ok(SelectionResult::new(argmax(&means), sampler.counts(), Termination::Decision))
}
