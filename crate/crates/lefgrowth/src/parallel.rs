//! Data-parallel helpers with a sequential fallback.
//!
//! The hot loops of this crate (pair verification, all-pairs BFS, fuzz
//! batches) are embarrassingly parallel. With the `parallel` feature
//! (default) they shard over rayon; without it the same entry points run
//! sequentially. The `*_seq` variants are always available so benches can
//! compare both code paths in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_indexed_seq<U, F>(len: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..len).map(f).collect()
}

/// First `Some` result in index order, scanning sequentially.
pub fn find_map_seq<U, F>(len: usize, f: F) -> Option<U>
where
    F: Fn(usize) -> Option<U>,
{
    (0..len).find_map(f)
}

#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(len: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(len: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    map_indexed_seq(len, f)
}

/// First `Some` result in index order. The parallel version still returns
/// the *first* match (rayon's `find_map_first`), so results are
/// deterministic across both code paths.
#[cfg(feature = "parallel")]
pub fn find_map<U, F>(len: usize, f: F) -> Option<U>
where
    U: Send,
    F: Fn(usize) -> Option<U> + Sync + Send,
{
    (0..len).into_par_iter().find_map_first(f)
}

#[cfg(not(feature = "parallel"))]
pub fn find_map<U, F>(len: usize, f: F) -> Option<U>
where
    U: Send,
    F: Fn(usize) -> Option<U> + Sync + Send,
{
    find_map_seq(len, f)
}

/// Sums `f(i)` over `0..len`.
#[cfg(feature = "parallel")]
pub fn sum_indexed<F>(len: usize, f: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    (0..len).into_par_iter().map(f).sum()
}

#[cfg(not(feature = "parallel"))]
pub fn sum_indexed<F>(len: usize, f: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    sum_indexed_seq(len, f)
}

pub fn sum_indexed_seq<F>(len: usize, f: F) -> u64
where
    F: Fn(usize) -> u64,
{
    (0..len).map(f).sum()
}
