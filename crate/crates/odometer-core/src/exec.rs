//! Execution policy for embarrassingly parallel scans.
//!
//! Scans over independent translation amounts run either sequentially or on
//! a rayon pool. Results are collected in input order, so reports are
//! byte-identical regardless of the policy or thread count.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecPolicy {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel {
        /// `None` uses rayon's default thread count.
        threads: Option<usize>,
    },
}

impl ExecPolicy {
    /// Parallel with the given degree when the feature is enabled; degree 1
    /// or a build without the `parallel` feature selects the sequential path.
    pub fn with_degree(threads: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            if threads == 1 {
                ExecPolicy::Sequential
            } else if threads == 0 {
                ExecPolicy::Parallel { threads: None }
            } else {
                ExecPolicy::Parallel { threads: Some(threads) }
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = threads;
            ExecPolicy::Sequential
        }
    }
}

/// Map `f` over `items`, preserving input order in the output.
pub fn map_collect<I, T, F>(policy: ExecPolicy, items: Vec<I>, f: F) -> Vec<T>
where
    I: Send + Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match policy {
        ExecPolicy::Sequential => items.iter().map(|i| f(i)).collect(),
        #[cfg(feature = "parallel")]
        ExecPolicy::Parallel { threads } => {
            use rayon::prelude::*;
            match threads {
                None => items.par_iter().map(|i| f(i)).collect(),
                Some(t) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(t)
                        .build()
                        .expect("thread pool");
                    pool.install(|| items.par_iter().map(|i| f(i)).collect())
                }
            }
        }
    }
}
