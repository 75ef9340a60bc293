//! Deterministic parallel replica loops.
//!
//! Replicas are split into fixed-size chunks; each chunk is accumulated
//! sequentially and the chunk accumulators are merged in chunk order, so the
//! result does not depend on the number of worker threads.

use rayon::prelude::*;

use crate::error::Result;
use crate::stats::Accumulator;

const CHUNK: u64 = 1024;

/// Runs `f(i)` for `i in 0..n` and accumulates each of its `K` outputs.
pub fn accumulate<const K: usize, F>(n: u64, f: F) -> Result<[Accumulator; K]>
where
    F: Fn(u64) -> Result<[f64; K]> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<[Accumulator; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = [Accumulator::default(); K];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let v = f(i)?;
                for k in 0..K {
                    acc[k].push(v[k]);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = [Accumulator::default(); K];
    for part in &parts {
        for k in 0..K {
            total[k].merge(&part[k]);
        }
    }
    Ok(total)
}

/// As [`accumulate`] with a run-time number `k` of outputs.
pub fn accumulate_dyn<F>(n: u64, k: usize, f: F) -> Result<Vec<Accumulator>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<Accumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Accumulator::default(); k];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let v = f(i)?;
                debug_assert_eq!(v.len(), k);
                for (a, x) in acc.iter_mut().zip(v) {
                    a.push(x);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![Accumulator::default(); k];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total)
}

/// Runs `f(i)` for `i in 0..n` and returns the outputs in replica order.
pub fn collect<T, F>(n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}
