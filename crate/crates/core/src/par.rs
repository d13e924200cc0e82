//! Deterministic data-parallel helpers.
//!
//! With the `parallel` feature these fan out over rayon; without it they run
//! the same chunked loops on the calling thread. Sums are accumulated per fixed
//! chunk of [`CHUNK`] items and the chunk partials are folded pairwise, so the
//! floating-point result never depends on how many workers took part.

use std::ops::Add;

/// Items per reduction chunk.
pub const CHUNK: usize = 128;

/// Evaluates `f(i)` for `i in 0..n`, preserving order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fallible variant of [`map_range`]; the first error in index order wins.
pub fn try_map_range<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_range(n, f).into_iter().collect()
}

/// Fills `out` in fixed-size blocks of `block` elements, `f(block_index, slice)`.
pub fn fill_blocks<T, F>(out: &mut [T], block: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.par_chunks_mut(block)
            .enumerate()
            .for_each(|(i, chunk)| f(i, chunk));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.chunks_mut(block)
            .enumerate()
            .for_each(|(i, chunk)| f(i, chunk));
    }
}

/// Deterministic sum of `f(i)` over `0..n`.
pub fn sum_range<T, F>(n: usize, f: F) -> T
where
    T: Copy + Default + Add<Output = T> + Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_range(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).fold(T::default(), |acc, i| acc + f(i))
    });
    pairwise(&partials)
}

/// Pairwise (cascade) summation in a fixed tree order.
pub fn pairwise<T>(values: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    match values.len() {
        0 => T::default(),
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise(lo) + pairwise(hi)
        }
    }
}

/// Number of workers the current pool would use.
pub fn workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_exact_integers() {
        let s: f64 = sum_range(10_001, |i| i as f64);
        assert_eq!(s, 10_000.0 * 10_001.0 / 2.0);
    }

    #[test]
    fn empty_sum_is_zero() {
        let s: f64 = sum_range(0, |_| 1.0);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn map_preserves_order() {
        let v = map_range(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn sum_is_independent_of_worker_count() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let with = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sum_range(50_000, f))
        };
        let one = with(1);
        assert_eq!(one.to_bits(), with(3).to_bits());
        assert_eq!(one.to_bits(), with(8).to_bits());
    }
}
