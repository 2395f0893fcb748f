//! Procedures with a probability-of-correct-selection guarantee.

mod config;
mod sequential;
mod stagewise;

pub use config::{FhnVariance, FixedPrecisionConfig, DEFAULT_FHN_BUDGET_CAP};
pub use sequential::{
    fhn, fhn_boundary, fhn_c, kn, kn_match, kn_w, paulson, paulson_a, MatchOutcome,
};
pub use stagewise::{bechhofer, bechhofer_sample_size, rinott, rinott_sample_size};
