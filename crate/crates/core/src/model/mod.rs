mod instance;
mod oracle;
mod result;
mod rng;
mod stats;

pub use instance::ProblemInstance;
pub use oracle::{gaussian_sample, GaussianOracle, Sampler, SamplingOracle};
pub use result::{argmax, argmax_over, AllocationRecord, Elimination, SelectionResult, Termination};
pub use rng::{derive_seed, observation_stream, RandomStream};
pub use stats::{pairwise_variance, welford_update, RunningStat};
