use super::config::{FhnVariance, FixedPrecisionConfig, DEFAULT_FHN_BUDGET_CAP};
use crate::error::{Error, Result};
use crate::model::{
    argmax_over, pairwise_variance, Elimination, RunningStat, Sampler, SelectionResult,
    Termination,
};
use crate::numerics::kn_h2;

const VARIANCE_FLOOR: f64 = 1e-12;

/// Survivors of one all-pairwise screen. `keep(j, i)` says whether `j`
/// survives its comparison against `i`. Should every alternative fail, the
/// largest mean is retained so the set never empties.
fn screen(survivors: &[usize], means: &[f64], mut keep: impl FnMut(usize, usize) -> bool) -> Vec<usize> {
    let kept: Vec<usize> = survivors
        .iter()
        .copied()
        .filter(|&j| survivors.iter().all(|&i| i == j || keep(j, i)))
        .collect();
    if kept.is_empty() {
        vec![argmax_over(means, survivors)]
    } else {
        kept
    }
}

fn log_dropped(log: &mut Vec<Elimination>, before: &[usize], after: &[usize], stage: u64, map: &[usize]) {
    for &j in before {
        if !after.contains(&j) {
            log.push(Elimination { stage, index: map[j] });
        }
    }
}

/// Lockstep state over a subset of alternatives, indexed locally.
struct Lockstep<'s, 'a> {
    sampler: &'s mut Sampler<'a>,
    members: Vec<usize>,
    sums: Vec<f64>,
    survivors: Vec<usize>,
    n: u64,
    taken: u64,
    log: Vec<Elimination>,
}

impl<'s, 'a> Lockstep<'s, 'a> {
    fn new(sampler: &'s mut Sampler<'a>, members: &[usize]) -> Self {
        Self {
            sampler,
            members: members.to_vec(),
            sums: vec![0.0; members.len()],
            survivors: (0..members.len()).collect(),
            n: 0,
            taken: 0,
            log: Vec::new(),
        }
    }

    /// One observation from every survivor; returns them by local index.
    fn round(&mut self) -> Vec<(usize, f64)> {
        let obs: Vec<(usize, f64)> = self
            .survivors
            .iter()
            .map(|&j| (j, self.sampler.draw(self.members[j])))
            .collect();
        for &(j, x) in &obs {
            self.sums[j] += x;
        }
        self.n += 1;
        self.taken += obs.len() as u64;
        obs
    }

    fn means(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.sums.iter().map(|s| s / n).collect()
    }

    fn apply(&mut self, next: Vec<usize>) {
        log_dropped(&mut self.log, &self.survivors, &next, self.n, &self.members);
        self.survivors = next;
    }

    fn cap_reached(&self, cap: Option<u64>) -> bool {
        cap.is_some_and(|c| self.taken + self.survivors.len() as u64 > c)
    }

    fn winner(&self) -> usize {
        self.members[argmax_over(&self.means(), &self.survivors)]
    }
}

fn finish(sampler: &Sampler, selected: usize, log: Vec<Elimination>, by: Termination) -> SelectionResult {
    SelectionResult::new(selected, sampler.counts(), by).with_eliminations(log)
}

/// `ln((k-1)/alpha) sigma^2 / (delta - lambda)`.
pub fn paulson_a(k: usize, alpha: f64, variance: f64, delta: f64, lambda: f64) -> f64 {
    ((k - 1) as f64 / alpha).ln() * variance / (delta - lambda)
}

/// Known common variance. `j` is eliminated at stage `n` once
/// `n (Xbar_j - Xbar_i) <= -a + lambda n` for a surviving `i`.
pub fn paulson(
    variance: f64,
    config: &FixedPrecisionConfig,
    sampler: &mut Sampler,
) -> Result<SelectionResult> {
    let k = sampler.k();
    config.validate(k, 0)?;
    let delta = config.require_delta()?;
    let lambda = config.require_lambda(delta)?;
    if !(variance > 0.0) {
        return Err(Error::config("variance", format!("must be > 0, got {variance}")));
    }
    let a = paulson_a(k, config.alpha, variance, delta, lambda);
    let members: Vec<usize> = (0..k).collect();
    let mut st = Lockstep::new(sampler, &members);
    st.round();
    loop {
        let n = st.n as f64;
        let bound = -a + lambda * n;
        let sums = st.sums.clone();
        let next = screen(&st.survivors, &st.means(), |j, i| sums[j] - sums[i] > bound);
        st.apply(next);
        if st.survivors.len() == 1 {
            let w = st.winner();
            let log = std::mem::take(&mut st.log);
            return Ok(finish(sampler, w, log, Termination::Decision));
        }
        if st.cap_reached(config.budget_cap) {
            let w = st.winner();
            let log = std::mem::take(&mut st.log);
            return Ok(finish(sampler, w, log, Termination::BudgetCap));
        }
        st.round();
    }
}

/// Half-width of KN's continuation region,
/// `max{0, (delta / 2n)(h^2 s2 / delta^2 - n)}`.
pub fn kn_w(h2: f64, s2: f64, delta: f64, n: u64) -> f64 {
    let n = n as f64;
    (delta / (2.0 * n) * (h2 * s2 / (delta * delta) - n)).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub winner: usize,
    /// Observations taken inside the match.
    pub samples: u64,
    pub terminated_by: Termination,
    pub eliminations: Vec<Elimination>,
}

/// First stage of `n0` paired observations per member; returns the pairwise
/// variance matrix (local indices) and leaves `st` at `n = n0`.
fn first_stage(st: &mut Lockstep, n0: u64) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let m = st.members.len();
    let mut obs = vec![Vec::with_capacity(n0 as usize); m];
    for _ in 0..n0 {
        for (j, x) in st.round() {
            obs[j].push(x);
        }
    }
    let mut s2 = vec![vec![0.0; m]; m];
    for j in 0..m {
        for i in 0..j {
            let v = pairwise_variance(&obs[j], &obs[i])?;
            s2[j][i] = v;
            s2[i][j] = v;
        }
    }
    Ok((s2, obs))
}

fn kn_run(
    sampler: &mut Sampler,
    members: &[usize],
    alpha: f64,
    delta: f64,
    n0: u64,
    cap: Option<u64>,
) -> Result<MatchOutcome> {
    if members.is_empty() {
        return Err(Error::config("candidates", "match needs at least one alternative"));
    }
    if members.len() == 1 {
        return Ok(MatchOutcome {
            winner: members[0],
            samples: 0,
            terminated_by: Termination::Decision,
            eliminations: Vec::new(),
        });
    }
    let h2 = kn_h2(members.len(), n0, alpha)?;
    let mut st = Lockstep::new(sampler, members);
    let (s2, _) = first_stage(&mut st, n0)?;
    let terminated_by = loop {
        let n = st.n;
        let means = st.means();
        let next = screen(&st.survivors, &means, |j, i| {
            means[j] - means[i] >= -kn_w(h2, s2[j][i], delta, n)
        });
        st.apply(next);
        if st.survivors.len() == 1 {
            break Termination::Decision;
        }
        if st.cap_reached(cap) {
            break Termination::BudgetCap;
        }
        st.round();
    };
    Ok(MatchOutcome {
        winner: st.winner(),
        samples: st.taken,
        terminated_by,
        eliminations: std::mem::take(&mut st.log),
    })
}

pub fn kn(config: &FixedPrecisionConfig, sampler: &mut Sampler) -> Result<SelectionResult> {
    let k = sampler.k();
    config.validate(k, 2)?;
    let delta = config.require_delta()?;
    let members: Vec<usize> = (0..k).collect();
    let out = kn_run(sampler, &members, config.alpha, delta, config.n0, config.budget_cap)?;
    Ok(finish(sampler, out.winner, out.eliminations, out.terminated_by))
}

/// KN restricted to `candidates` (global indices), with fresh first-stage
/// samples. A single candidate wins without sampling.
pub fn kn_match(
    candidates: &[usize],
    alpha: f64,
    delta: f64,
    n0: u64,
    sampler: &mut Sampler,
) -> Result<MatchOutcome> {
    if n0 < 2 {
        return Err(Error::config("procedure.n0", format!("must be at least 2, got {n0}")));
    }
    if !(delta > 0.0) {
        return Err(Error::config("procedure.delta", format!("must be > 0, got {delta}")));
    }
    if let Some(&bad) = candidates.iter().find(|&&c| c >= sampler.k()) {
        return Err(Error::IndexOutOfRange { index: bad, k: sampler.k() });
    }
    kn_run(sampler, candidates, alpha, delta, n0, None)
}

/// `-2 ln(2 alpha / (k - 1))`.
pub fn fhn_c(k: usize, alpha: f64) -> f64 {
    -2.0 * (2.0 * alpha / (k - 1) as f64).ln()
}

/// `sqrt((c + ln(t + 1))(t + 1))`.
pub fn fhn_boundary(c: f64, t: f64) -> f64 {
    ((c + (t + 1.0).ln()) * (t + 1.0)).sqrt()
}

/// Indifference-zone-free elimination. Stops at the budget cap (default
/// [`DEFAULT_FHN_BUDGET_CAP`]) with the current best sample mean.
pub fn fhn(config: &FixedPrecisionConfig, sampler: &mut Sampler) -> Result<SelectionResult> {
    let k = sampler.k();
    config.validate(k, 2)?;
    let c = fhn_c(k, config.alpha);
    let cap = Some(config.budget_cap.unwrap_or(DEFAULT_FHN_BUDGET_CAP));
    let members: Vec<usize> = (0..k).collect();
    let mut st = Lockstep::new(sampler, &members);
    let (s2_first, obs) = first_stage(&mut st, config.n0)?;
    let full = config.fhn_variance == FhnVariance::Full;
    // Running statistics of X_j - X_i for j > i.
    let mut diffs: Vec<Vec<RunningStat>> = Vec::new();
    if full {
        diffs = (0..k)
            .map(|j| {
                (0..j)
                    .map(|i| {
                        let d: Vec<f64> = obs[j].iter().zip(&obs[i]).map(|(a, b)| a - b).collect();
                        RunningStat::from_slice(&d)
                    })
                    .collect()
            })
            .collect();
    }
    drop(obs);
    let terminated_by = loop {
        let n = st.n as f64;
        let means = st.means();
        let s2 = |j: usize, i: usize| -> f64 {
            let v = if full {
                let (hi, lo) = if j > i { (j, i) } else { (i, j) };
                diffs[hi][lo].m2() / (diffs[hi][lo].count() - 1) as f64
            } else {
                s2_first[j][i]
            };
            v.max(VARIANCE_FLOOR)
        };
        let next = screen(&st.survivors, &means, |j, i| {
            let t = n / s2(j, i);
            t * (means[j] - means[i]) >= -fhn_boundary(c, t)
        });
        st.apply(next);
        if st.survivors.len() == 1 {
            break Termination::Decision;
        }
        if st.cap_reached(cap) {
            break Termination::BudgetCap;
        }
        let obs = st.round();
        if full {
            for (a, &(j, xj)) in obs.iter().enumerate() {
                for &(i, xi) in &obs[..a] {
                    diffs[j][i].push(xj - xi);
                }
            }
        }
    };
    let w = st.winner();
    let log = std::mem::take(&mut st.log);
    Ok(finish(sampler, w, log, terminated_by))
}
