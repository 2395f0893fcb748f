use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Decision,
    BudgetCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elimination {
    pub stage: u64,
    pub index: usize,
}

/// One alternative's share of a budget stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationRecord {
    pub stage: u64,
    pub alternative: usize,
    /// Cumulative sample size the allocation rule asked for.
    pub target: u64,
    /// Samples actually taken this stage.
    pub granted: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected: usize,
    pub per_alt_samples: Vec<u64>,
    pub total_samples: u64,
    pub elimination_log: Vec<Elimination>,
    pub terminated_by: Termination,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub allocation_trace: Vec<AllocationRecord>,
}

impl SelectionResult {
    pub fn new(selected: usize, per_alt_samples: Vec<u64>, terminated_by: Termination) -> Self {
        let total_samples = per_alt_samples.iter().sum();
        Self {
            selected,
            per_alt_samples,
            total_samples,
            elimination_log: Vec::new(),
            terminated_by,
            allocation_trace: Vec::new(),
        }
    }

    pub fn with_eliminations(mut self, log: Vec<Elimination>) -> Self {
        self.elimination_log = log;
        self
    }

    pub fn with_allocation_trace(mut self, trace: Vec<AllocationRecord>) -> Self {
        self.allocation_trace = trace;
        self
    }

    pub fn decided(&self) -> bool {
        self.terminated_by == Termination::Decision
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// `argmax` restricted to `candidates`, which must be non-empty.
pub fn argmax_over(xs: &[f64], candidates: &[usize]) -> usize {
    let mut best = candidates[0];
    for &i in &candidates[1..] {
        if xs[i] > xs[best] || (xs[i] == xs[best] && i < best) {
            best = i;
        }
    }
    best
}
