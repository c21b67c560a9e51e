//! Execution policy for the data-parallel inner loops.
//!
//! Every parallel loop in the crate goes through the helpers here. Work is
//! split into chunks whose boundaries depend only on the input size, never on
//! the number of threads, and chunk results are merged in order. Floating
//! point reductions are therefore bit-identical between the two policies.
//!
//! Without the `parallel` feature, [`Execution::Parallel`] runs sequentially.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a data-parallel loop is executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Execution {
    /// Plain iteration on the calling thread.
    Sequential,
    /// rayon work-stealing over fixed-size chunks (sequential when the
    /// `parallel` feature is disabled).
    #[default]
    Parallel,
}

impl Execution {
    /// True when this policy will actually fan out to a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Splits `range` into consecutive chunks of at most `chunk` elements.
pub(crate) fn chunk_ranges(range: Range<usize>, chunk: usize) -> Vec<Range<usize>> {
    let chunk = chunk.max(1);
    let mut out = Vec::with_capacity((range.len() + chunk - 1) / chunk);
    let mut lo = range.start;
    while lo < range.end {
        let hi = (lo + chunk).min(range.end);
        out.push(lo..hi);
        lo = hi;
    }
    out
}

/// Applies `f` to each chunk of `range`, returning results in chunk order.
pub(crate) fn map_chunks<R, F>(exec: Execution, range: Range<usize>, chunk: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<usize>) -> R + Sync + Send,
{
    let chunks = chunk_ranges(range, chunk);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && chunks.len() > 1 {
        return chunks.into_par_iter().map(f).collect();
    }
    let _ = exec;
    chunks.into_iter().map(f).collect()
}

/// Applies `f` to every item, preserving order.
pub(crate) fn map_items<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && items.len() > 1 {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Builds a vector of length `len` where entry `i` is `f(i)`, chunked.
pub(crate) fn tabulate<R, F>(exec: Execution, len: usize, chunk: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    map_chunks(exec, 0..len, chunk, |r| r.map(&f).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range() {
        let c = chunk_ranges(3..20, 5);
        assert_eq!(c, vec![3..8, 8..13, 13..18, 18..20]);
        assert!(chunk_ranges(4..4, 3).is_empty());
    }

    #[test]
    fn float_reduction_is_policy_independent() {
        let sum = |exec| -> f64 {
            map_chunks(exec, 1..200_001, 4096, |r| r.map(|n| 1.0 / (n as f64).powf(1.01)).sum::<f64>())
                .into_iter()
                .sum()
        };
        assert_eq!(sum(Execution::Sequential).to_bits(), sum(Execution::Parallel).to_bits());
    }

    #[test]
    fn tabulate_matches_sequential() {
        let a = tabulate(Execution::Parallel, 10_000, 333, |i| i * i);
        let b: Vec<usize> = (0..10_000).map(|i| i * i).collect();
        assert_eq!(a, b);
    }
}
