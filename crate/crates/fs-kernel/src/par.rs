//! Data-parallel helpers. With the `parallel` feature off everything runs
//! on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// `map` over `0..n`, for seeded per-index generation.
pub fn map_range<R: Send>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Indices in `0..n` where `pred` fails.
pub fn failures(n: usize, pred: impl Fn(usize) -> bool + Sync + Send) -> Vec<usize> {
    map_range(n, |i| (!pred(i)).then_some(i)).into_iter().flatten().collect()
}

pub fn sequential_map<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}
