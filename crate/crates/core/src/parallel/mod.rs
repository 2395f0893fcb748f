//! Master/worker execution and the parallel procedures.

mod aps;
mod kt;
mod pool;

pub use aps::{aps, aps_a, aps_survives, aps_tau, ApsConfig, ApsJob, ApsOutcome, ApsReply};
pub use kt::{
    boost_round, kt_plus, partition, round_alpha, BracketJob, BracketReply, KtConfig, KtOutcome,
    MatchRecord,
};
pub use pool::{
    with_pool, worker_loop, Backend, Completion, DelayModel, Endpoint, Message, Pool, PoolJob,
    PoolSpec, SimulatedPool, ThreadedPool,
};
