//! Order-preserving parallel map over independent work items.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Applies `f` to every item on a pool of `jobs` threads. Results keep the
/// input order; the first error (by index) is returned.
pub fn map<T: Sync, R: Send>(
    items: &[T],
    jobs: usize,
    f: impl Fn(&T) -> Result<R> + Sync,
) -> Result<Vec<R>> {
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let out: Vec<Result<R>> = pool.install(|| items.par_iter().map(&f).collect());
    out.into_iter().collect()
}
