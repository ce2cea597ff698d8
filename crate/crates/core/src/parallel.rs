//! Worker-pool control.
//!
//! Kernels use rayon and inherit the pool they run in; `with_workers` pins a
//! computation to an explicit thread count.

use rayon::ThreadPoolBuilder;

/// Fixed chunk length for reductions. Chunk boundaries never depend on the
/// worker count, so partial sums combine in the same order everywhere.
pub const REDUCTION_CHUNK: usize = 2048;

/// Minimum rows handed to one rayon task in row-parallel kernels.
pub const ROW_GRAIN: usize = 256;

/// Runs `f` inside a dedicated pool of `workers` threads.
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let pool = ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool construction");
    pool.install(f)
}

/// Number of workers in the pool the caller runs in.
pub fn current_workers() -> usize {
    rayon::current_num_threads()
}
