//! Data-parallel helpers with a sequential fallback.
//!
//! Batch work in this crate (dataset synthesis, Monte-Carlo feasibility,
//! fitting sweeps, batched tensor kernels) is expressed as independent
//! per-index jobs merged by index, so results are identical regardless of
//! thread count. With the `parallel` feature (default) the jobs run on the
//! rayon thread pool; without it everything runs sequentially. The `*_seq`
//! variants are always sequential and exist so benchmarks can compare both
//! paths in a single build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
pub fn par_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seq_map_indexed(n, f)
    }
}

/// Sequential twin of [`par_map_indexed`].
pub fn seq_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_and_seq_agree() {
        let f = |i: usize| (i * i) as u64 + 7;
        assert_eq!(par_map_indexed(100, f), seq_map_indexed(100, f));
    }

    #[test]
    fn empty_range() {
        let out: Vec<u8> = par_map_indexed(0, |_| 0u8);
        assert!(out.is_empty());
    }
}
