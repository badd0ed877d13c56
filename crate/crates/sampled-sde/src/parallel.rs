use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use sampled_sde_core::Executor;

use crate::error::{Error, Result};

/// Runs paths on a dedicated rayon pool. Results come back in path order, so
/// aggregates do not depend on the thread count.
pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    /// `threads == 0` lets rayon pick the number of threads.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Setup(format!("cannot start thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Parallel {
    fn map_paths<T, F>(&self, n: u64, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..n).into_par_iter().map(job).collect())
    }
}
