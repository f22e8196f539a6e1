//! Fixed-partition parallel reductions.
//!
//! Work is split into chunks of a fixed size independent of the thread count;
//! chunk results are combined sequentially in chunk order, so sums are
//! bit-identical for any pool size.

use rayon::prelude::*;

pub(crate) const CHUNK: usize = 4096;

/// `Σ_{i < count} term(i)` with a deterministic reduction order.
pub(crate) fn ordered_sum<F>(count: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|k| (k * CHUNK..((k + 1) * CHUNK).min(count)).map(&term).sum())
        .collect();
    partial.iter().sum()
}

/// Fallible variant of [`ordered_sum`]; the first error in index order wins.
pub(crate) fn try_ordered_sum<F, E>(count: usize, term: F) -> Result<f64, E>
where
    F: Fn(usize) -> Result<f64, E> + Sync,
    E: Send,
{
    let chunks = count.div_ceil(CHUNK);
    let partial: Vec<Result<f64, E>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut s = 0.0;
            for i in k * CHUNK..((k + 1) * CHUNK).min(count) {
                s += term(i)?;
            }
            Ok(s)
        })
        .collect();
    let mut total = 0.0;
    for p in partial {
        total += p?;
    }
    Ok(total)
}

/// Runs `f` on a pool capped at `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_are_identical_across_pool_sizes() {
        let term = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let one = with_threads(1, || ordered_sum(100_000, term));
        let four = with_threads(4, || ordered_sum(100_000, term));
        assert_eq!(one.to_bits(), four.to_bits());
        assert_eq!(ordered_sum(0, term), 0.0);
    }

    #[test]
    fn first_error_in_index_order() {
        let r: Result<f64, usize> =
            try_ordered_sum(20_000, |i| if i % 7000 == 6999 { Err(i) } else { Ok(1.0) });
        assert_eq!(r, Err(6999));
    }
}
