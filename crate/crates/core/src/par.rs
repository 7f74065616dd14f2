//! Data-parallel sweeps over lattice rows and index ranges.
//!
//! With the `parallel` feature (default) every helper fans out over rayon's
//! global pool; without it the same closures run on the calling thread.
//! Reductions always split the index range into fixed-size blocks and fold the
//! block results in order, so sums are bitwise reproducible regardless of the
//! number of worker threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Block length for deterministic reductions.
const REDUCE_BLOCK: usize = 4096;

/// Calls `f(chunk_index, chunk)` for each consecutive chunk of `data`.
pub(crate) fn for_chunks<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Like [`for_chunks`] but walks three equally shaped buffers in lockstep.
pub(crate) fn for_chunks3<T, F>(a: &mut [T], b: &mut [T], c: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T], &mut [T], &mut [T]) + Sync + Send,
{
    debug_assert!(a.len() == b.len() && b.len() == c.len());
    #[cfg(feature = "parallel")]
    a.par_chunks_mut(chunk)
        .zip(b.par_chunks_mut(chunk))
        .zip(c.par_chunks_mut(chunk))
        .enumerate()
        .for_each(|(i, ((x, y), z))| f(i, x, y, z));
    #[cfg(not(feature = "parallel"))]
    a.chunks_mut(chunk)
        .zip(b.chunks_mut(chunk))
        .zip(c.chunks_mut(chunk))
        .enumerate()
        .for_each(|(i, ((x, y), z))| f(i, x, y, z));
}

/// Evaluates `f` on `0..len` and collects in index order.
pub(crate) fn map_range<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..len).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..len).map(f).collect();
}

/// Deterministic sum of `f(i)` over `0..len`.
pub(crate) fn sum_range<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = len.div_ceil(REDUCE_BLOCK);
    let partial = map_range(blocks, |b| {
        let lo = b * REDUCE_BLOCK;
        let hi = (lo + REDUCE_BLOCK).min(len);
        (lo..hi).map(&f).sum::<f64>()
    });
    partial.into_iter().sum()
}

/// Maximum of `f(i)` over `0..len` (0 for an empty range).
pub(crate) fn max_range<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = len.div_ceil(REDUCE_BLOCK);
    let partial = map_range(blocks, |b| {
        let lo = b * REDUCE_BLOCK;
        let hi = (lo + REDUCE_BLOCK).min(len);
        (lo..hi).map(&f).fold(0.0_f64, f64::max)
    });
    partial.into_iter().fold(0.0, f64::max)
}
