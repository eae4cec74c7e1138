//! Deterministic parallel reductions.
//!
//! Work is split into fixed-size index ranges, each range is reduced
//! sequentially, and the partial results are combined in a fixed binary
//! tree. The result is bitwise independent of the rayon thread count.

use rayon::prelude::*;
use std::ops::Range;

/// Neuron chunk size used by every Monte-Carlo accumulation.
pub const CHUNK: usize = 2048;

pub fn tree_reduce<T, F, C>(len: usize, chunk: usize, map: F, combine: C) -> Option<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
    C: Fn(T, T) -> T + Sync + Send,
{
    assert!(chunk > 0);
    let n_chunks = len.div_ceil(chunk);
    let mut parts: Vec<T> = (0..n_chunks)
        .into_par_iter()
        .map(|c| map(c * chunk..((c + 1) * chunk).min(len)))
        .collect();
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop()
}

/// Elementwise tree sum of per-chunk vectors of length `width`.
pub fn tree_sum_vec<F>(len: usize, width: usize, map: F) -> Vec<f64>
where
    F: Fn(Range<usize>, &mut [f64]) + Sync + Send,
{
    tree_reduce(
        len,
        CHUNK,
        |r| {
            let mut acc = vec![0.0; width];
            map(r, &mut acc);
            acc
        },
        |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            a
        },
    )
    .unwrap_or_else(|| vec![0.0; width])
}
