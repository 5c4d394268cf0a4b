//! Reductions whose result does not depend on the rayon thread count.
//!
//! Work is split into fixed-size chunks; each chunk is summed sequentially and
//! the per-chunk partials are combined by a pairwise tree in index order.

use rayon::prelude::*;

const CHUNK: usize = 4096;

/// Sum of `term(i)` for `i in 0..len`, bit-identical for any thread count.
pub fn sum_indexed<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = len.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += term(i);
            }
            acc
        })
        .collect();
    pairwise(&partials)
}

/// Maximum of `term(i)`; zero for an empty range. NaN terms propagate.
pub fn max_indexed<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    (0..len)
        .into_par_iter()
        .map(|i| term(i))
        .reduce(|| 0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

fn pairwise(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise(a) + pairwise(b)
        }
    }
}
