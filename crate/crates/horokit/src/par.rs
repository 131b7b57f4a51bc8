//! Data-parallel helpers with a sequential fallback.
//!
//! Every reduction goes through [`pairwise_sum`] over an ordered buffer, so a
//! parallel run and a sequential run produce bit-identical results.

use std::cell::Cell;
use std::ops::{Add, Mul};

thread_local! {
    static FORCE_SERIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with parallel execution disabled on the calling thread.
pub fn with_serial<R>(f: impl FnOnce() -> R) -> R {
    FORCE_SERIAL.with(|flag| {
        let old = flag.replace(true);
        let out = f();
        flag.set(old);
        out
    })
}

/// Whether parallel execution is available and not disabled for this thread.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && !FORCE_SERIAL.with(Cell::get)
}

/// Caps the global worker pool at `threads`. Must run before the first
/// parallel call; a no-op without the `parallel` feature.
pub fn limit_threads(threads: usize) -> crate::Result<()> {
    if threads == 0 {
        return Err(crate::Error::Input("thread count must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| crate::Error::Precondition(format!("thread pool: {e}")))?;
    Ok(())
}

/// Maps `f` over `0..len`, preserving order.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel_enabled() && len > 1 {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    (0..len).map(f).collect()
}

/// Pairwise (cascade) summation of an ordered slice.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        return xs.iter().fold(T::default(), |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Deterministic weighted sum `Σ w_i f(i)` evaluated (possibly) in parallel.
pub fn weighted_sum<T, F>(weights: &[f64], f: F) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T> + Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let terms = map_indexed(weights.len(), |i| f(i) * weights[i]);
    pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }

    #[test]
    fn serial_override_is_scoped() {
        let outer = parallel_enabled();
        with_serial(|| assert!(!parallel_enabled()));
        assert_eq!(parallel_enabled(), outer);
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let w: Vec<f64> = (0..257).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let f = |i: usize| (i as f64 * 0.37).sin();
        let a: f64 = weighted_sum(&w, f);
        let b: f64 = with_serial(|| weighted_sum(&w, f));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
