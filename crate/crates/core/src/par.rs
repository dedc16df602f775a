//! Data-parallel helpers with a sequential fallback.
//!
//! Every parallel loop in the crate goes through this module. With the
//! `parallel` feature disabled, or with [`Exec::Sequential`], the same
//! closures run on the calling thread in index order. Reductions over
//! floating-point values are done per fixed-size block and then combined
//! by pairwise summation, so results do not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution policy for data-parallel loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this policy actually runs on the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Block size used by [`block_reduce`]. Fixed so that block boundaries,
/// and therefore rounding, are identical in every execution mode.
pub const BLOCK: usize = 4096;

/// Splits `0..n` into blocks of [`BLOCK`] indices, folds each block
/// sequentially with `fold`, and returns the per-block accumulators in
/// block order.
pub fn block_reduce<A, F>(exec: Exec, n: usize, fold: F) -> Vec<A>
where
    A: Send,
    F: Fn(std::ops::Range<usize>) -> A + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    map_range(exec, blocks, |b| {
        let start = b * BLOCK;
        fold(start..(start + BLOCK).min(n))
    })
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
