use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetConfig {
    /// Total budget `N`.
    pub total: u64,
    /// Per-stage increment `tau`.
    pub tau: u64,
    pub n0: u64,
}

impl BudgetConfig {
    pub fn new(total: u64, tau: u64, n0: u64) -> Self {
        Self { total, tau, n0 }
    }

    pub fn validate(&self, k: usize, min_n0: u64) -> Result<()> {
        if k < 2 {
            return Err(Error::config("k", format!("need at least 2 alternatives, got {k}")));
        }
        if self.n0 < min_n0 {
            return Err(Error::config(
                "procedure.n0",
                format!("must be at least {min_n0}, got {}", self.n0),
            ));
        }
        if self.tau < 1 {
            return Err(Error::config("procedure.tau", "must be at least 1"));
        }
        let first = self.n0 * k as u64;
        if self.total < first {
            return Err(Error::config(
                "procedure.budget",
                format!("must cover the first stage k * n0 = {first}, got {}", self.total),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_must_cover_first_stage() {
        assert!(BudgetConfig::new(49, 10, 10).validate(5, 5).is_err());
        assert!(BudgetConfig::new(50, 10, 10).validate(5, 5).is_ok());
        assert!(BudgetConfig::new(50, 0, 10).validate(5, 5).is_err());
        assert!(BudgetConfig::new(500, 10, 4).validate(5, 5).is_err());
    }
}
