//! Monte Carlo evaluation of selection procedures.

mod compare;
mod evaluate;
mod instances;
mod procedure;
mod report;

pub use compare::{compare, sign_test_upper, PairedReport};
pub use evaluate::{
    evaluate, replicate, verdict, wilson_interval, EvalReport, ExperimentConfig, Replication,
    Verdict,
};
pub use instances::{equal_means_config, monotone_config, slippage_config, InstanceSpec};
pub use procedure::{ProcedureSpec, RunRecord};
pub use report::{report_schema, validate_json, CSV_HEADER, REPORT_SCHEMA_VERSION};
