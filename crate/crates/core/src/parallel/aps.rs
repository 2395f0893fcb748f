use serde::{Deserialize, Serialize};

use super::pool::{with_pool, Message, Pool, PoolJob, PoolSpec};
use crate::error::{Error, Result};
use crate::model::{
    Elimination, RandomStream, RunningStat, Sampler, SamplingOracle,
    SelectionResult, Termination,
};

const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApsConfig {
    pub alpha: f64,
    pub delta: f64,
    pub n0: u64,
}

impl ApsConfig {
    pub fn validate(&self, k: usize) -> Result<()> {
        if k < 2 {
            return Err(Error::config("k", format!("need at least 2 alternatives, got {k}")));
        }
        let upper = 1.0 - 1.0 / k as f64;
        if !(self.alpha > 0.0 && self.alpha < upper) {
            return Err(Error::config("procedure.alpha", format!("must lie in (0, {upper}), got {}", self.alpha)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::config("procedure.delta", format!("must be > 0, got {}", self.delta)));
        }
        if self.n0 < 2 {
            return Err(Error::config("procedure.n0", format!("must be at least 2, got {}", self.n0)));
        }
        Ok(())
    }
}

/// `-ln(2 alpha / (k - 1))`.
pub fn aps_a(k: usize, alpha: f64) -> f64 {
    -(2.0 * alpha / (k - 1) as f64).ln()
}

/// Pairwise precision of the mean difference, zero until both sides have
/// `n0` observations.
pub fn aps_tau(si: &RunningStat, sj: &RunningStat, n0: u64) -> f64 {
    if si.count() < n0 || sj.count() < n0 {
        return 0.0;
    }
    let v = |s: &RunningStat| s.variance().unwrap_or(0.0).max(VARIANCE_FLOOR) / s.count() as f64;
    1.0 / (v(si) + v(sj))
}

/// Whether `i` survives its comparison with `j`.
pub fn aps_survives(si: &RunningStat, sj: &RunningStat, a: f64, delta: f64, n0: u64) -> bool {
    let tau = aps_tau(si, sj, n0);
    tau * (si.mean() - sj.mean()) >= (-a / delta + delta / 2.0 * tau).min(0.0)
}

#[derive(Debug)]
pub enum ApsJob {
    Sample { alt: usize, stream: RandomStream },
    Phantom,
}

impl PoolJob for ApsJob {
    fn is_phantom(&self) -> bool {
        matches!(self, ApsJob::Phantom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApsReply {
    pub alt: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApsOutcome {
    /// `None` when the run aborted.
    pub result: Option<SelectionResult>,
    pub abort: Option<Error>,
    /// Phantom completions seen, i.e. screening epochs.
    pub stages: u64,
    /// Accepted observations in arrival order, per alternative.
    pub accepted: Vec<Vec<f64>>,
    pub messages: Vec<Message>,
}

impl ApsOutcome {
    pub fn into_result(self) -> Result<SelectionResult> {
        match (self.result, self.abort) {
            (Some(r), _) => Ok(r),
            (None, Some(e)) => Err(e),
            (None, None) => Err(Error::Pool("run produced no result".into())),
        }
    }
}

/// Round-robin over survivors with a phantom closing each cycle.
struct Dispatcher {
    cursor: usize,
}

impl Dispatcher {
    fn next(&mut self, alive: &[bool], sampler: &mut Sampler) -> ApsJob {
        while self.cursor < alive.len() && !alive[self.cursor] {
            self.cursor += 1;
        }
        if self.cursor == alive.len() {
            self.cursor = 0;
            return ApsJob::Phantom;
        }
        let alt = self.cursor;
        self.cursor += 1;
        ApsJob::Sample { alt, stream: sampler.ticket(alt) }
    }
}

fn master(
    pool: &mut dyn Pool<ApsJob, ApsReply>,
    k: usize,
    config: &ApsConfig,
    sampler: &mut Sampler,
) -> (Result<(usize, Vec<Elimination>)>, u64, Vec<u64>, Vec<Vec<f64>>) {
    let a = aps_a(k, config.alpha);
    let mut alive = vec![true; k];
    let mut n_alive = k;
    let mut stats = vec![RunningStat::new(); k];
    let mut delivered = vec![0u64; k];
    let mut accepted = vec![Vec::new(); k];
    let mut log = Vec::new();
    let mut stage = 0u64;
    let mut rr = Dispatcher { cursor: 0 };

    let mut run = || -> Result<usize> {
        for w in 0..pool.workers() {
            let job = rr.next(&alive, sampler);
            pool.dispatch(w, job)?;
        }
        while n_alive > 1 {
            let c = pool.next_completion()?;
            match c.reply.alt {
                Some(h) => {
                    delivered[h] += 1;
                    if alive[h] {
                        stats[h].push(c.reply.value);
                        accepted[h].push(c.reply.value);
                    }
                }
                None => {
                    stage += 1;
                    let survivors: Vec<usize> = (0..k).filter(|&i| alive[i]).collect();
                    let out: Vec<usize> = survivors
                        .iter()
                        .copied()
                        .filter(|&i| {
                            !survivors
                                .iter()
                                .all(|&j| j == i || aps_survives(&stats[i], &stats[j], a, config.delta, config.n0))
                        })
                        .collect();
                    for i in out {
                        alive[i] = false;
                        n_alive -= 1;
                        log.push(Elimination { stage, index: i });
                    }
                }
            }
            if n_alive > 1 {
                let job = rr.next(&alive, sampler);
                pool.dispatch(c.worker, job)?;
            }
        }
        Ok((0..k).find(|&i| alive[i]).expect("one survivor"))
    };
    let outcome = run().map(|w| (w, log));
    (outcome, stage, delivered, accepted)
}

/// Asynchronous selection over a worker pool. Observations are assigned to
/// alternatives in round-robin order; all-pairwise screening happens whenever
/// the phantom job completes.
pub fn aps(
    config: &ApsConfig,
    oracle: &dyn SamplingOracle,
    seed: u64,
    pool: &PoolSpec,
) -> Result<ApsOutcome> {
    let k = oracle.k();
    config.validate(k)?;
    let handler = |job: ApsJob| match job {
        ApsJob::Sample { alt, mut stream } => ApsReply {
            alt: Some(alt),
            value: oracle.sample(alt, &mut stream),
        },
        ApsJob::Phantom => ApsReply { alt: None, value: 0.0 },
    };
    let mut sampler = Sampler::new(oracle, seed);
    let (outcome, stages, delivered, accepted, messages) = with_pool(pool, seed, &handler, |p| {
        let (o, s, d, acc) = master(p, k, config, &mut sampler);
        (o, s, d, acc, p.messages().to_vec())
    })?;
    let mut out = ApsOutcome {
        result: None,
        abort: None,
        stages,
        accepted,
        messages,
    };
    match outcome {
        Ok((w, log)) => {
            out.result = Some(
                SelectionResult::new(w, delivered, Termination::Decision).with_eliminations(log),
            );
        }
        Err(e) => out.abort = Some(e),
    }
    Ok(out)
}
