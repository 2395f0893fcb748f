use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::procedure::ProcedureSpec;
use crate::error::{Error, Result};
use crate::model::{derive_seed, ProblemInstance, RunningStat, Termination};

const Z_95: f64 = 1.959_963_984_540_054;

/// A Monte Carlo experiment: `replications` independent runs of one
/// procedure on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: ProblemInstance,
    pub procedure: ProcedureSpec,
    pub replications: u64,
    pub seed: u64,
    /// Tolerance for good selection. Falls back to the instance's
    /// indifference zone and then to the procedure's `delta`.
    pub good_delta: Option<f64>,
    /// Worker threads for replications; `None` uses every core.
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(instance: ProblemInstance, procedure: ProcedureSpec, replications: u64, seed: u64) -> Self {
        Self {
            instance,
            procedure,
            replications,
            seed,
            good_delta: None,
            jobs: None,
        }
    }

    pub fn with_good_delta(mut self, delta: f64) -> Self {
        self.good_delta = Some(delta);
        self
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = Some(jobs);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::config("harness.replications", "must be at least 1"));
        }
        if let Some(d) = self.good_delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::config("harness.good_delta", format!("must be > 0, got {d}")));
            }
        }
        if self.jobs == Some(0) {
            return Err(Error::config("harness.jobs", "must be at least 1"));
        }
        Ok(())
    }

    pub fn effective_good_delta(&self) -> Option<f64> {
        self.good_delta
            .or(self.instance.iz_delta())
            .or(self.procedure.delta())
    }

    /// Seed of replication `rep`.
    pub fn replication_seed(&self, rep: u64) -> u64 {
        derive_seed(self.seed, rep)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes)[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Outcome of a single replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub selected: Option<usize>,
    pub samples: u64,
    /// Budget cap reached or pool failure. Counted as an incorrect selection.
    pub aborted: bool,
    pub correct: bool,
    pub good: bool,
    pub opportunity_cost: f64,
}

/// Runs every replication. Replications run in parallel but the output is in
/// replication order and does not depend on scheduling.
pub fn replicate(config: &ExperimentConfig) -> Result<Vec<Replication>> {
    config.validate()?;
    let inst = &config.instance;
    let good_delta = config.effective_good_delta();
    let worst_gap = inst.best_mean() - inst.worst_mean();
    let one = |rep: u64| -> Result<Replication> {
        match config.procedure.run(inst, config.replication_seed(rep)) {
            Ok(r) => {
                let aborted = r.terminated_by != Termination::Decision;
                let correct = !aborted && inst.is_correct(r.selected);
                let good = !aborted
                    && match good_delta {
                        Some(d) => inst.is_good(r.selected, d),
                        None => correct,
                    };
                let opportunity_cost = if aborted {
                    worst_gap
                } else {
                    inst.best_mean() - inst.means()[r.selected]
                };
                Ok(Replication {
                    selected: Some(r.selected),
                    samples: r.total_samples,
                    aborted,
                    correct,
                    good,
                    opportunity_cost,
                })
            }
            Err(Error::Pool(_)) => Ok(Replication {
                selected: None,
                samples: 0,
                aborted: true,
                correct: false,
                good: false,
                opportunity_cost: worst_gap,
            }),
            Err(e) => Err(e),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::config("harness.jobs", e.to_string()))?;
    pool.install(|| (0..config.replications).into_par_iter().map(one).collect())
}

/// Estimates with standard errors from `replications` runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub procedure: String,
    pub k: usize,
    pub config_hash: String,
    pub replications: u64,
    pub pcs_hat: f64,
    pub pcs_se: f64,
    /// 95% Wilson score interval for PCS.
    pub pcs_wilson: (f64, f64),
    pub pgs_hat: f64,
    pub pgs_se: f64,
    pub eoc_hat: f64,
    pub eoc_se: f64,
    pub mean_n: f64,
    pub mean_n_se: f64,
    pub aborted: u64,
    pub runtime_s: f64,
}

impl PartialEq for EvalReport {
    /// Wall-clock runtime is ignored.
    fn eq(&self, o: &Self) -> bool {
        self.procedure == o.procedure
            && self.k == o.k
            && self.config_hash == o.config_hash
            && self.replications == o.replications
            && self.pcs_hat == o.pcs_hat
            && self.pcs_se == o.pcs_se
            && self.pcs_wilson == o.pcs_wilson
            && self.pgs_hat == o.pgs_hat
            && self.pgs_se == o.pgs_se
            && self.eoc_hat == o.eoc_hat
            && self.eoc_se == o.eoc_se
            && self.mean_n == o.mean_n
            && self.mean_n_se == o.mean_n_se
            && self.aborted == o.aborted
    }
}

fn proportion_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn mean_se(s: &RunningStat) -> f64 {
    s.variance().map_or(0.0, |v| (v / s.count() as f64).sqrt())
}

/// 95% Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = Z_95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

impl EvalReport {
    pub fn from_replications(config: &ExperimentConfig, reps: &[Replication], runtime_s: f64) -> Self {
        let r = reps.len() as u64;
        let correct = reps.iter().filter(|x| x.correct).count() as u64;
        let good = reps.iter().filter(|x| x.good).count() as u64;
        let aborted = reps.iter().filter(|x| x.aborted).count() as u64;
        let mut oc = RunningStat::new();
        let mut n = RunningStat::new();
        for x in reps {
            oc.push(x.opportunity_cost);
            n.push(x.samples as f64);
        }
        let pcs = correct as f64 / r as f64;
        let pgs = good as f64 / r as f64;
        Self {
            procedure: config.procedure.name().to_string(),
            k: config.instance.k(),
            config_hash: config.hash(),
            replications: r,
            pcs_hat: pcs,
            pcs_se: proportion_se(pcs, r),
            pcs_wilson: wilson_interval(correct, r),
            pgs_hat: pgs,
            pgs_se: proportion_se(pgs, r),
            eoc_hat: oc.mean(),
            eoc_se: mean_se(&oc),
            mean_n: n.mean(),
            mean_n_se: mean_se(&n),
            aborted,
            runtime_s,
        }
    }
}

pub fn evaluate(config: &ExperimentConfig) -> Result<EvalReport> {
    let start = Instant::now();
    let reps = replicate(config)?;
    Ok(EvalReport::from_replications(config, &reps, start.elapsed().as_secs_f64()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// A single replication says nothing about a probability.
    Inconclusive,
    /// The procedure has no PCS target.
    NoGuarantee,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::NoGuarantee => "NO-GUARANTEE",
        })
    }
}

/// Compares estimated PCS with the target `1 - alpha`, allowing two
/// standard errors of Monte Carlo noise.
pub fn verdict(report: &EvalReport, alpha: Option<f64>) -> Verdict {
    match alpha {
        None => Verdict::NoGuarantee,
        Some(_) if report.replications < 2 => Verdict::Inconclusive,
        Some(a) if report.pcs_hat >= 1.0 - a - 2.0 * report.pcs_se => Verdict::Pass,
        Some(_) => Verdict::Fail,
    }
}
