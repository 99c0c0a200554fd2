//! Parallel execution strategies. Both are externally synchronous: they
//! spawn their workers, run the whole time loop and join before returning.

pub mod block;
pub mod partition;
pub mod reduction;
mod sync;

use std::time::Duration;

/// Time a worker may wait for a peer before the run is declared deadlocked.
pub const DEFAULT_WATCHDOG: Duration = Duration::from_secs(60);

pub use block::{
    solve_block_parallel, solve_block_parallel_with, BlockOptions, BlockStats, PartialSum, WorkerCounters,
};
pub use partition::{idle_fraction, make_partition, owner, PartitionPlan};
pub use reduction::{
    solve_reduction_parallel, solve_reduction_parallel_with, ReductionOptions, ReductionStats, DEFAULT_CHUNK,
};
