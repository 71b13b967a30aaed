//! Deterministic parallel replica execution.
//!
//! Replicas are split into fixed-size chunks whose layout depends only on
//! the sample count, never on the thread count; chunk results are merged
//! in chunk order, so every statistic (including floating-point sums) is
//! bit-identical across pool sizes.

use rayon::prelude::*;

/// Chunk layout for `n` replicas. Roughly 512 chunks, at least 64 replicas
/// each, independent of parallelism.
pub fn chunk_size(n: u64) -> u64 {
    (n / 512).clamp(64, 1 << 20).min(n.max(1))
}

/// Replica ranges, in order.
pub fn chunk_ranges(n: u64) -> Vec<std::ops::Range<u64>> {
    let c = chunk_size(n);
    let mut out = Vec::new();
    let mut start = 0;
    while start < n {
        let end = (start + c).min(n);
        out.push(start..end);
        start = end;
    }
    out
}

/// Run `work` over every chunk in parallel and fold the results in chunk
/// order.
pub fn run_chunked<A, F>(n_samples: u64, work: F) -> Vec<A>
where
    A: Send,
    F: Fn(std::ops::Range<u64>) -> A + Send + Sync,
{
    chunk_ranges(n_samples).into_par_iter().map(work).collect()
}
