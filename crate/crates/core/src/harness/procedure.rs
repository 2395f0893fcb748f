use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_budget::{equal_allocation, evi_ll, kg, ocba, BudgetConfig, KgPrior};
use crate::fixed_precision::{
    bechhofer, fhn, kn, paulson, rinott, FhnVariance, FixedPrecisionConfig,
};
use crate::model::{GaussianOracle, ProblemInstance, Sampler, SamplingOracle, SelectionResult};
use crate::parallel::{aps, kt_plus, ApsConfig, KtConfig, MatchRecord, Message, PoolSpec};

/// A procedure together with all of its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ProcedureSpec {
    Bechhofer {
        alpha: f64,
        delta: f64,
        variance: Option<f64>,
    },
    Rinott {
        alpha: f64,
        delta: f64,
        n0: u64,
    },
    Paulson {
        alpha: f64,
        delta: f64,
        lambda: f64,
        variance: Option<f64>,
        budget_cap: Option<u64>,
    },
    Kn {
        alpha: f64,
        delta: f64,
        n0: u64,
        budget_cap: Option<u64>,
    },
    Fhn {
        alpha: f64,
        n0: u64,
        budget_cap: Option<u64>,
        variance_update: FhnVariance,
    },
    Ocba {
        budget: u64,
        tau: u64,
        n0: u64,
    },
    EviLl {
        budget: u64,
        tau: u64,
        n0: u64,
    },
    Kg {
        budget: u64,
        variance: Option<f64>,
        prior: KgPrior,
    },
    EqualAllocation {
        budget: u64,
    },
    Aps {
        alpha: f64,
        delta: f64,
        n0: u64,
        pool: PoolSpec,
    },
    KtPlus {
        alpha: f64,
        delta: f64,
        n0: u64,
        g: usize,
        lambda: Option<f64>,
        pool: PoolSpec,
    },
}

/// Output of one run, with the pool message log for parallel procedures.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub result: SelectionResult,
    pub messages: Vec<Message>,
    pub matches: Vec<MatchRecord>,
}

impl ProcedureSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProcedureSpec::Bechhofer { .. } => "bechhofer",
            ProcedureSpec::Rinott { .. } => "rinott",
            ProcedureSpec::Paulson { .. } => "paulson",
            ProcedureSpec::Kn { .. } => "kn",
            ProcedureSpec::Fhn { .. } => "fhn",
            ProcedureSpec::Ocba { .. } => "ocba",
            ProcedureSpec::EviLl { .. } => "evi_ll",
            ProcedureSpec::Kg { .. } => "kg",
            ProcedureSpec::EqualAllocation { .. } => "equal_allocation",
            ProcedureSpec::Aps { .. } => "aps",
            ProcedureSpec::KtPlus { .. } => "kt_plus",
        }
    }

    /// Target error probability, for procedures that carry a guarantee.
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            ProcedureSpec::Bechhofer { alpha, .. }
            | ProcedureSpec::Rinott { alpha, .. }
            | ProcedureSpec::Paulson { alpha, .. }
            | ProcedureSpec::Kn { alpha, .. }
            | ProcedureSpec::Fhn { alpha, .. }
            | ProcedureSpec::Aps { alpha, .. }
            | ProcedureSpec::KtPlus { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match *self {
            ProcedureSpec::Bechhofer { delta, .. }
            | ProcedureSpec::Rinott { delta, .. }
            | ProcedureSpec::Paulson { delta, .. }
            | ProcedureSpec::Kn { delta, .. }
            | ProcedureSpec::Aps { delta, .. }
            | ProcedureSpec::KtPlus { delta, .. } => Some(delta),
            _ => None,
        }
    }

    pub fn run(&self, instance: &ProblemInstance, seed: u64) -> Result<SelectionResult> {
        Ok(self.run_traced(instance, seed)?.result)
    }

    pub fn run_traced(&self, instance: &ProblemInstance, seed: u64) -> Result<RunRecord> {
        let oracle = GaussianOracle::new(instance.clone());
        self.run_on(&oracle, instance.common_variance(), seed)
    }

    /// Runs against any oracle. `known_variance` feeds procedures that assume
    /// a known common variance when `variance` is left unset.
    pub fn run_on(
        &self,
        oracle: &dyn SamplingOracle,
        known_variance: Option<f64>,
        seed: u64,
    ) -> Result<RunRecord> {
        let variance = |v: &Option<f64>| {
            v.or(known_variance).ok_or_else(|| {
                Error::config("procedure.variance", "a known common variance is required")
            })
        };
        let plain = |result| RunRecord {
            result,
            messages: Vec::new(),
            matches: Vec::new(),
        };
        let mut s = Sampler::new(oracle, seed);
        let fp = |alpha: f64, n0: u64| FixedPrecisionConfig::new(alpha, n0);
        let r = match self {
            ProcedureSpec::Bechhofer { alpha, delta, variance: v } => {
                bechhofer(variance(v)?, &fp(*alpha, 0).with_delta(*delta), &mut s)?
            }
            ProcedureSpec::Rinott { alpha, delta, n0 } => {
                rinott(&fp(*alpha, *n0).with_delta(*delta), &mut s)?
            }
            ProcedureSpec::Paulson { alpha, delta, lambda, variance: v, budget_cap } => {
                let mut c = fp(*alpha, 0).with_delta(*delta).with_lambda(*lambda);
                c.budget_cap = *budget_cap;
                paulson(variance(v)?, &c, &mut s)?
            }
            ProcedureSpec::Kn { alpha, delta, n0, budget_cap } => {
                let mut c = fp(*alpha, *n0).with_delta(*delta);
                c.budget_cap = *budget_cap;
                kn(&c, &mut s)?
            }
            ProcedureSpec::Fhn { alpha, n0, budget_cap, variance_update } => {
                let mut c = fp(*alpha, *n0).with_fhn_variance(*variance_update);
                c.budget_cap = *budget_cap;
                fhn(&c, &mut s)?
            }
            ProcedureSpec::Ocba { budget, tau, n0 } => {
                ocba(&BudgetConfig::new(*budget, *tau, *n0), &mut s)?
            }
            ProcedureSpec::EviLl { budget, tau, n0 } => {
                evi_ll(&BudgetConfig::new(*budget, *tau, *n0), &mut s)?
            }
            ProcedureSpec::Kg { budget, variance: v, prior } => {
                kg(*budget, variance(v)?, prior, &mut s)?
            }
            ProcedureSpec::EqualAllocation { budget } => equal_allocation(*budget, &mut s)?,
            ProcedureSpec::Aps { alpha, delta, n0, pool } => {
                let cfg = ApsConfig { alpha: *alpha, delta: *delta, n0: *n0 };
                let out = aps(&cfg, oracle, seed, pool)?;
                let messages = out.messages.clone();
                return Ok(RunRecord {
                    result: out.into_result()?,
                    messages,
                    matches: Vec::new(),
                });
            }
            ProcedureSpec::KtPlus { alpha, delta, n0, g, lambda, pool } => {
                let cfg = KtConfig { alpha: *alpha, delta: *delta, n0: *n0, g: *g, lambda: *lambda };
                let out = kt_plus(&cfg, oracle, seed, pool)?;
                return Ok(RunRecord {
                    result: out.result,
                    messages: out.messages,
                    matches: out.matches,
                });
            }
        };
        Ok(plain(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::slippage_config;
    use crate::parallel::DelayModel;

    pub(crate) fn every_procedure() -> Vec<ProcedureSpec> {
        let pool = PoolSpec::simulated(2, DelayModel::Exponential(1.0));
        vec![
            ProcedureSpec::Bechhofer { alpha: 0.05, delta: 0.5, variance: None },
            ProcedureSpec::Rinott { alpha: 0.05, delta: 0.5, n0: 10 },
            ProcedureSpec::Paulson { alpha: 0.05, delta: 0.5, lambda: 0.25, variance: None, budget_cap: None },
            ProcedureSpec::Kn { alpha: 0.05, delta: 0.5, n0: 10, budget_cap: None },
            ProcedureSpec::Fhn { alpha: 0.05, n0: 10, budget_cap: Some(50_000), variance_update: FhnVariance::Full },
            ProcedureSpec::Ocba { budget: 200, tau: 10, n0: 5 },
            ProcedureSpec::EviLl { budget: 200, tau: 10, n0: 5 },
            ProcedureSpec::Kg { budget: 200, variance: None, prior: KgPrior::Diffuse },
            ProcedureSpec::EqualAllocation { budget: 200 },
            ProcedureSpec::Aps { alpha: 0.05, delta: 0.5, n0: 10, pool: pool.clone() },
            ProcedureSpec::KtPlus { alpha: 0.05, delta: 0.5, n0: 10, g: 2, lambda: None, pool },
        ]
    }

    #[test]
    fn every_procedure_runs_and_round_trips() {
        let inst = slippage_config(4, 0.5, 1.0).unwrap();
        for p in every_procedure() {
            let r = p.run(&inst, 7).unwrap();
            assert!(r.selected < 4, "{}", p.name());
            assert_eq!(r.total_samples, r.per_alt_samples.iter().sum::<u64>());
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<ProcedureSpec>(&json).unwrap(), p);
        }
    }

    #[test]
    fn known_variance_is_required() {
        let inst = ProblemInstance::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let p = ProcedureSpec::Bechhofer { alpha: 0.05, delta: 0.5, variance: None };
        assert!(matches!(p.run(&inst, 0), Err(Error::InvalidConfig { ref key, .. }) if key == "procedure.variance"));
        let p = ProcedureSpec::Bechhofer { alpha: 0.05, delta: 0.5, variance: Some(2.0) };
        assert!(p.run(&inst, 0).is_ok());
    }
}
