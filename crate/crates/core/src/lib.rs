//! Ranking-and-selection toolkit.
//!
//! Selection procedures pick the alternative with the largest mean out of `k`
//! stochastic systems that can only be observed through noisy samples:
//!
//! * [`fixed_precision`]: Bechhofer, Rinott, Paulson, KN and the
//!   indifference-zone-free FHN procedure, each targeting a probability of
//!   correct selection.
//! * [`fixed_budget`]: OCBA, EVI with linear loss, knowledge gradient and the
//!   large-deviations optimal static allocation.
//! * [`parallel`]: a master/worker pool (OS threads or a seeded event
//!   simulation) with the asynchronous APS procedure and the KT+ knockout
//!   tournament.
//! * [`harness`]: Monte Carlo macro-replications estimating PCS, PGS, EOC and
//!   expected sample size.
//!
//! Alternatives are indexed from 0. Every run is a pure function of its
//! configuration and seed: observations come from counter-based random
//! streams, one per (replication, alternative).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fixed_budget;
pub mod fixed_precision;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod parallel;

pub use error::{Error, Result};
pub use model::{
    GaussianOracle, ProblemInstance, RandomStream, RunningStat, Sampler, SamplingOracle,
    SelectionResult, Termination,
};
