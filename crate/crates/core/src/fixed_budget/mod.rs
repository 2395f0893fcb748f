//! Procedures that spend a fixed sampling budget.

mod allocation;
mod config;
mod equal;
mod evi;
mod kg;
mod ocba;

pub use allocation::{glynn_juneja_allocation, largest_remainder, ocba_targets};
pub use config::BudgetConfig;
pub use equal::equal_allocation;
pub use evi::{evi_eta, evi_ll, evi_stage, EviStage};
pub use kg::{kg, kg_factor, KgPrior, PosteriorState, DIFFUSE_PRIOR_PRECISION};
pub use ocba::{ocba, ocba_stage, OcbaStage};

pub(crate) const VARIANCE_FLOOR: f64 = 1e-12;
