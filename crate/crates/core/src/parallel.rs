//! Data-parallel ensemble map with a sequential fallback.
//!
//! With the `parallel` feature (default) the map runs on rayon; without it
//! the same closure runs on a plain iterator. Results are collected in index
//! order either way, so reductions downstream are order-deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn par_map<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Sequential reference map used by the benchmark suite for comparison.
pub fn seq_map<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Install a rayon pool with the requested worker count and run `f` inside
/// it. `workers == 0` (or a sequential build) runs `f` directly.
#[cfg(feature = "parallel")]
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<T>(_workers: usize, f: impl FnOnce() -> T) -> T {
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_preserves_index_order() {
        let v = par_map(100, |i| i * i);
        assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn worker_pool_result_is_identical() {
        let a = with_workers(1, || par_map(50, |i| i as f64 / 3.0));
        let b = with_workers(2, || par_map(50, |i| i as f64 / 3.0));
        assert_eq!(a, b);
    }
}
