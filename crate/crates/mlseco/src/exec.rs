//! Data-parallel execution bridge.
//!
//! With the `parallel` feature (default) the mapping helpers fan out over
//! rayon; without it they run sequentially. Callers pre-derive one seed per
//! index, so output never depends on scheduling. `seq_map_range` is always
//! sequential and exists so the benchmark suite can compare both paths in a
//! single build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential reference path for the same shape as [`map_range`].
pub fn seq_map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..n).map(f).collect()
}

/// Cap the worker count for the whole process. `None` keeps the default
/// (one worker per core). Without the `parallel` feature this is a no-op.
#[cfg(feature = "parallel")]
pub fn configure_workers(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // Ignore failure: the global pool can only be built once, which is
        // fine for tests that call this repeatedly.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn configure_workers(_jobs: Option<usize>) {}
