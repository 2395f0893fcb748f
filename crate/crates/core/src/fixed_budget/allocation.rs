use super::VARIANCE_FLOOR;
use crate::error::{Error, Result};

/// Integer apportionment of `total` proportional to `weights`: floors first,
/// then the leftover units go to the largest fractional parts (lowest index
/// on ties). Zero total weight puts everything on index 0.
pub fn largest_remainder(weights: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let mut out = vec![0u64; weights.len()];
    if weights.is_empty() {
        return out;
    }
    if !(sum > 0.0) || !sum.is_finite() {
        out[0] = total;
        return out;
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut given = 0u64;
    for (o, q) in out.iter_mut().zip(&quotas) {
        *o = (q.floor() as u64).min(total - given);
        given += *o;
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut left = total - given;
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

fn unique_best(means: &[f64]) -> Result<usize> {
    let best = crate::model::argmax(means);
    if means
        .iter()
        .enumerate()
        .any(|(i, &m)| i != best && m == means[best])
    {
        return Err(Error::TiedBest);
    }
    Ok(best)
}

fn check_inputs(means: &[f64], variances: &[f64]) -> Result<()> {
    if means.len() != variances.len() {
        return Err(Error::LengthMismatch(means.len(), variances.len()));
    }
    if means.len() < 2 {
        return Err(Error::config("means", "need at least 2 alternatives"));
    }
    Ok(())
}

/// Relative weights: `sigma_j^2 / gap_j^2` for non-best `j` and
/// `sigma_b sqrt(sum_j (w_j / sigma_j)^2)` for the best.
fn static_weights(means: &[f64], variances: &[f64], best: usize) -> Vec<f64> {
    let sd: Vec<f64> = variances.iter().map(|v| v.max(VARIANCE_FLOOR).sqrt()).collect();
    let mut w: Vec<f64> = (0..means.len())
        .map(|j| {
            if j == best {
                0.0
            } else {
                let gap = means[best] - means[j];
                sd[j] * sd[j] / (gap * gap)
            }
        })
        .collect();
    let ss: f64 = (0..means.len())
        .filter(|&j| j != best)
        .map(|j| (w[j] / sd[j]).powi(2))
        .sum();
    w[best] = sd[best] * ss.sqrt();
    w
}

/// Asymptotically optimal static allocation of `total` samples. Errors when
/// the best mean is tied.
pub fn glynn_juneja_allocation(means: &[f64], variances: &[f64], total: f64) -> Result<Vec<f64>> {
    check_inputs(means, variances)?;
    if variances.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::config("variances", "must be > 0"));
    }
    let best = unique_best(means)?;
    let w = static_weights(means, variances, best);
    let s: f64 = w.iter().sum();
    Ok(w.iter().map(|x| total * x / s).collect())
}

/// Real-valued stage targets summing to `budget` from estimated means and
/// variances (variances floored). Errors when the sample best is tied.
pub fn ocba_targets(means: &[f64], variances: &[f64], budget: f64) -> Result<Vec<f64>> {
    check_inputs(means, variances)?;
    let best = unique_best(means)?;
    let w = static_weights(means, variances, best);
    let s: f64 = w.iter().sum();
    Ok(w.iter().map(|x| budget * x / s).collect())
}
