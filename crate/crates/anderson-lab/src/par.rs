//! Ensemble parallelism helpers.
//!
//! Every ensemble loop in the crate maps an index range through a pure
//! closure and collects the results *in index order*; reductions over the
//! collected vector are always sequential and compensated. That makes the
//! output of [`map_indexed`] byte-identical whether it runs on rayon or on
//! one thread, which is the determinism contract the experiments rely on.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `0..n` through `f`, in parallel when the `parallel` feature is on.
/// Results are ordered by index regardless of scheduling.
#[cfg(feature = "parallel")]
pub fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Sequential reference implementation, kept unconditionally so benchmarks
/// can compare the two paths within one build.
pub fn map_indexed_seq<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Run `f` on a pool with `threads` workers (a hint; `None` keeps the global
/// default). Without the `parallel` feature the hint is ignored.
#[cfg(feature = "parallel")]
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<T>(_threads: Option<usize>, f: impl FnOnce() -> T) -> T {
    f()
}
