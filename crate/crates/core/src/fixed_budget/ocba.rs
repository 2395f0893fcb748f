use super::allocation::{largest_remainder, ocba_targets};
use super::config::BudgetConfig;
use super::VARIANCE_FLOOR;
use crate::error::Result;
use crate::model::{argmax, AllocationRecord, RunningStat, Sampler, SelectionResult, Termination};

/// One OCBA stage: integer cumulative targets summing to `b_{t+1}` and the
/// samples granted to each alternative, which sum to `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct OcbaStage {
    pub targets: Vec<u64>,
    pub granted: Vec<u64>,
}

/// Allocation of the next `tau` samples given current counts and estimates.
///
/// Alternatives below their target ask for the shortfall; when the
/// shortfalls exceed `tau` they are scaled down to `tau` by largest
/// remainder. A non-best alternative tied with the sample best has an
/// unbounded ratio and receives the whole stage (lowest index first).
pub fn ocba_stage(counts: &[u64], means: &[f64], variances: &[f64], tau: u64) -> Result<OcbaStage> {
    let k = counts.len();
    let budget = counts.iter().sum::<u64>() + tau;
    let best = argmax(means);
    if let Some(tied) = (0..k).find(|&i| i != best && means[i] == means[best]) {
        let mut granted = vec![0; k];
        granted[tied] = tau;
        let targets = counts.iter().zip(&granted).map(|(n, g)| n + g).collect();
        return Ok(OcbaStage { targets, granted });
    }
    let vars: Vec<f64> = variances.iter().map(|v| v.max(VARIANCE_FLOOR)).collect();
    let real = ocba_targets(means, &vars, budget as f64)?;
    let targets = largest_remainder(&real, budget);
    let short: Vec<f64> = targets
        .iter()
        .zip(counts)
        .map(|(&t, &n)| t.saturating_sub(n) as f64)
        .collect();
    let granted = largest_remainder(&short, tau);
    Ok(OcbaStage { targets, granted })
}

pub(super) fn estimates(stats: &[RunningStat]) -> Result<(Vec<f64>, Vec<f64>)> {
    let means = stats.iter().map(|s| s.mean()).collect();
    let vars = stats
        .iter()
        .map(|s| s.variance())
        .collect::<Result<Vec<_>>>()?;
    Ok((means, vars))
}

pub fn ocba(config: &BudgetConfig, sampler: &mut Sampler) -> Result<SelectionResult> {
    let k = sampler.k();
    config.validate(k, 5)?;
    let mut stats: Vec<RunningStat> = (0..k)
        .map(|i| RunningStat::from_slice(&sampler.draw_n(i, config.n0)))
        .collect();
    let mut trace = Vec::new();
    let mut stage = 0u64;
    while sampler.total() < config.total {
        stage += 1;
        let (means, vars) = estimates(&stats)?;
        let step = ocba_stage(&sampler.counts(), &means, &vars, config.tau)?;
        for i in 0..k {
            for _ in 0..step.granted[i] {
                stats[i].push(sampler.draw(i));
            }
            trace.push(AllocationRecord {
                stage,
                alternative: i,
                target: step.targets[i],
                granted: step.granted[i],
            });
        }
    }
    let means: Vec<f64> = stats.iter().map(|s| s.mean()).collect();
    Ok(SelectionResult::new(argmax(&means), sampler.counts(), Termination::Decision)
        .with_allocation_trace(trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed_budget::glynn_juneja_allocation;
    use crate::model::{GaussianOracle, ProblemInstance};
    use proptest::prelude::*;

    #[test]
    fn frozen_truth_tracks_optimal_fractions() {
        let means = [0.0, 1.0, 2.0, 3.0];
        let vars = [1.0; 4];
        let counts = [10u64; 4];
        let step = ocba_stage(&counts, &means, &vars, 100_000 - 40).unwrap();
        let gj = glynn_juneja_allocation(&means, &vars, 100_000.0).unwrap();
        for (t, g) in step.targets.iter().zip(&gj) {
            assert!((*t as f64 - g).abs() <= 1.0);
        }
        assert_eq!(step.granted.iter().sum::<u64>(), 100_000 - 40);
    }

    #[test]
    fn tie_with_sample_best_takes_whole_stage() {
        let step = ocba_stage(&[5, 5, 5], &[1.0, 2.0, 2.0], &[1.0; 3], 7).unwrap();
        assert_eq!(step.granted, vec![0, 0, 7]);
    }

    #[test]
    fn zero_variance_is_floored() {
        let step = ocba_stage(&[5, 5], &[0.0, 1.0], &[0.0, 0.0], 4).unwrap();
        assert_eq!(step.granted.iter().sum::<u64>(), 4);
    }

    #[test]
    fn budget_overshoot_bounded() {
        let inst = ProblemInstance::with_common_variance(vec![0.0, 0.5, 1.0], 1.0).unwrap();
        let oracle = GaussianOracle::new(inst);
        let mut s = Sampler::new(&oracle, 8);
        let cfg = BudgetConfig::new(203, 10, 5);
        let r = ocba(&cfg, &mut s).unwrap();
        assert!(r.total_samples >= 203 && r.total_samples <= 203 + 9);
        assert_eq!(r.total_samples, 15 + 10 * 19);
        for i in 0..3 {
            let sum: u64 = r.allocation_trace.iter().filter(|a| a.alternative == i).map(|a| a.granted).sum();
            assert_eq!(sum + 5, r.per_alt_samples[i]);
        }
    }

    #[test]
    fn requires_five_first_stage_samples() {
        let inst = ProblemInstance::with_common_variance(vec![0.0, 0.5], 1.0).unwrap();
        let oracle = GaussianOracle::new(inst);
        let mut s = Sampler::new(&oracle, 0);
        assert!(ocba(&BudgetConfig::new(100, 10, 4), &mut s).is_err());
    }

    proptest! {
        #[test]
        fn stage_targets_nonnegative_and_sum(
            means in proptest::collection::vec(-3.0f64..3.0, 2..8),
            seed_vars in proptest::collection::vec(0.0f64..4.0, 8),
            counts in proptest::collection::vec(5u64..60, 8),
            tau in 1u64..50,
        ) {
            let k = means.len();
            let step = ocba_stage(&counts[..k], &means, &seed_vars[..k], tau).unwrap();
            let b: u64 = counts[..k].iter().sum::<u64>() + tau;
            prop_assert_eq!(step.targets.iter().sum::<u64>(), b);
            prop_assert_eq!(step.granted.iter().sum::<u64>(), tau);
        }
    }
}
