//! Execution helpers: data-parallel maps with a sequential fallback.
//!
//! With the `parallel` feature the indexed maps run on the rayon pool;
//! without it they degrade to plain loops. Outputs are ordered by index in
//! both modes, and all reductions elsewhere in the crate sum the collected
//! buffers sequentially, so results are bitwise identical regardless of the
//! feature or the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential twin of [`map_indexed`], always available for benchmarks and
/// for callers that want to avoid the pool.
pub fn map_indexed_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Fallible variant: first error wins (by index).
#[cfg(feature = "parallel")]
pub fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Fallible variant: first error wins (by index).
#[cfg(not(feature = "parallel"))]
pub fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Whether the parallel feature is compiled in.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
