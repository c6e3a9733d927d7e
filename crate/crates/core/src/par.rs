//! Data-parallel helpers. With the `parallel` feature the closures run on the
//! current rayon pool; without it everything runs sequentially in order.
//! Results are always returned in input order.

use serde::{Deserialize, Serialize};

/// How much parallelism a workload may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// Uses `workers` threads; `0` means one per core.
    Parallel { workers: usize },
    #[default]
    Auto,
}

impl Execution {
    pub fn from_workers(workers: usize) -> Self {
        match workers {
            1 => Execution::Sequential,
            w => Execution::Parallel { workers: w },
        }
    }

    /// Runs `f` under this execution policy.
    pub fn install<R: Send>(self, f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        {
            let threads = match self {
                Execution::Auto => return f(),
                Execution::Sequential => 1,
                Execution::Parallel { workers } => workers,
            };
            match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                Ok(pool) => pool.install(f),
                Err(err) => {
                    log::warn!("could not build thread pool ({err}); running inline");
                    f()
                }
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = self;
            f()
        }
    }
}

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
