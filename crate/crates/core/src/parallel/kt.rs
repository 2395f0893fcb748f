use serde::{Deserialize, Serialize};

use super::pool::{with_pool, Message, PoolJob, PoolSpec};
use crate::error::{Error, Result};
use crate::fixed_precision::kn_match;
use crate::model::{RunningStat, Sampler, SamplingOracle, SelectionResult, Termination};
use crate::numerics::rinott_h;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KtConfig {
    pub alpha: f64,
    pub delta: f64,
    pub n0: u64,
    /// Match size.
    pub g: usize,
    /// Accepted for completeness; no step of the procedure reads it.
    pub lambda: Option<f64>,
}

impl KtConfig {
    pub fn validate(&self, k: usize, m: usize) -> Result<()> {
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
        if self.n0 < 3 {
            return Err(Error::config("procedure.n0", format!("must be at least 3, got {}", self.n0)));
        }
        if self.g < 2 {
            return Err(Error::config("procedure.g", format!("must be at least 2, got {}", self.g)));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l < self.delta) {
                return Err(Error::config("procedure.lambda", format!("must lie in (0, delta), got {l}")));
            }
        }
        if m > k {
            return Err(Error::config("pool.workers", format!("must not exceed k = {k}, got {m}")));
        }
        Ok(())
    }
}

/// Error budget of knockout round `r` (1-based): `alpha / 2^r`.
pub fn round_alpha(alpha: f64, r: u32) -> f64 {
    alpha / 2f64.powi(r as i32)
}

/// Round index of the finalist stage, `ceil(log_g(k / m)) + 1`, computed on
/// integers.
pub fn boost_round(k: usize, m: usize, g: usize) -> u32 {
    let mut e = 0u32;
    let mut reach = m as u128;
    while reach < k as u128 {
        reach *= g as u128;
        e += 1;
    }
    e + 1
}

/// Alternatives handled by each worker: 1-based `i` goes to worker
/// `(i mod m) + 1`.
pub fn partition(k: usize, m: usize) -> Vec<Vec<usize>> {
    let mut parts = vec![Vec::new(); m];
    for alt in 0..k {
        parts[(alt + 1) % m].push(alt);
    }
    parts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub worker: usize,
    pub round: u32,
    pub alpha: f64,
    pub members: Vec<usize>,
    pub winner: usize,
    pub samples: u64,
}

#[derive(Debug)]
pub struct BracketJob {
    pub worker: usize,
    pub members: Vec<usize>,
}

impl PoolJob for BracketJob {}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketReply {
    pub worker: usize,
    pub finalist: usize,
    pub boosted_mean: f64,
    pub n_max: u64,
    pub counts: Vec<(usize, u64)>,
    pub matches: Vec<MatchRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KtOutcome {
    pub result: SelectionResult,
    pub matches: Vec<MatchRecord>,
    pub finalists: Vec<BracketReply>,
    pub messages: Vec<Message>,
}

/// One worker's knockout bracket followed by its finalist's boosting stage.
fn run_bracket(
    job: &BracketJob,
    k: usize,
    m: usize,
    config: &KtConfig,
    oracle: &dyn SamplingOracle,
    seed: u64,
) -> Result<BracketReply> {
    let mut sampler = Sampler::new(oracle, seed);
    let mut field = job.members.clone();
    let mut matches = Vec::new();
    let mut round = 1u32;
    while field.len() > 1 {
        let alpha = round_alpha(config.alpha, round);
        let mut next = Vec::with_capacity(field.len().div_ceil(config.g));
        for group in field.chunks(config.g) {
            let out = kn_match(group, alpha, config.delta, config.n0, &mut sampler)?;
            matches.push(MatchRecord {
                worker: job.worker,
                round,
                alpha,
                members: group.to_vec(),
                winner: out.winner,
                samples: out.samples,
            });
            next.push(out.winner);
        }
        field = next;
        round += 1;
    }
    let finalist = field[0];
    let r = boost_round(k, m, config.g);
    let h = if m >= 2 {
        rinott_h(m, config.n0, round_alpha(config.alpha, r))?
    } else {
        0.0
    };
    let mut stat = RunningStat::from_slice(&sampler.draw_n(finalist, config.n0));
    let s = stat.variance()?.sqrt();
    let n_max = ((h * s / config.delta).powi(2).ceil() as u64).max(config.n0);
    for _ in config.n0..n_max {
        stat.push(sampler.draw(finalist));
    }
    let counts = job
        .members
        .iter()
        .map(|&a| (a, sampler.taken(a)))
        .collect();
    Ok(BracketReply {
        worker: job.worker,
        finalist,
        boosted_mean: stat.mean(),
        n_max,
        counts,
        matches,
    })
}

/// Knockout tournament: every worker runs its own bracket without talking to
/// anyone, then the master picks the finalist with the largest boosted mean.
pub fn kt_plus(
    config: &KtConfig,
    oracle: &dyn SamplingOracle,
    seed: u64,
    pool: &PoolSpec,
) -> Result<KtOutcome> {
    let k = oracle.k();
    let m = pool.workers;
    config.validate(k, m)?;
    pool.validate()?;
    let handler = |job: BracketJob| run_bracket(&job, k, m, config, oracle, seed);
    let (replies, messages) = with_pool(pool, seed, &handler, |p| {
        let mut replies = Vec::with_capacity(m);
        for (w, members) in partition(k, m).into_iter().enumerate() {
            p.dispatch(w, BracketJob { worker: w, members })?;
        }
        for _ in 0..m {
            replies.push(p.next_completion()?.reply?);
        }
        Ok::<_, Error>((replies, p.messages().to_vec()))
    })??;
    let mut finalists = replies;
    finalists.sort_by_key(|r| r.worker);
    let mut per_alt = vec![0u64; k];
    for r in &finalists {
        for &(a, n) in &r.counts {
            per_alt[a] = n;
        }
    }
    let mut best = &finalists[0];
    for r in &finalists[1..] {
        if r.boosted_mean > best.boosted_mean
            || (r.boosted_mean == best.boosted_mean && r.finalist < best.finalist)
        {
            best = r;
        }
    }
    let result = SelectionResult::new(best.finalist, per_alt, Termination::Decision);
    let matches = finalists.iter().flat_map(|r| r.matches.clone()).collect();
    Ok(KtOutcome {
        result,
        matches,
        finalists,
        messages,
    })
}
