//! Execution helpers shared by the analysis modules.
//!
//! With the `parallel` feature (default) the helpers fan work out over rayon;
//! without it they run sequentially. Both paths evaluate reductions in the
//! same fixed order, so a result never depends on the feature flag or on the
//! size of the thread pool: floating-point sums are chunked at fixed
//! boundaries and combined sequentially, and everything else reduces with
//! associative, commutative integer operations.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk width for order-stable floating-point reductions.
const CHUNK: usize = 4096;

/// Whether this build dispatches work to a rayon pool.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Run `f` on a pool with `threads` workers (0 = rayon default). Without the
/// `parallel` feature the thread count is ignored and `f` runs inline.
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to build worker pool");
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(_threads: usize, f: impl FnOnce() -> R + Send) -> R {
    f()
}

/// Map `0..n` and collect results in index order.
#[cfg(feature = "parallel")]
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).map(f).collect()
}

/// Map `0..n` and fold with an associative, commutative combiner.
///
/// Only safe for order-insensitive payloads (integer sums, max, set unions);
/// floating-point accumulation belongs in [`stable_sum`] and friends.
#[cfg(feature = "parallel")]
pub fn map_reduce<T, F, R>(n: usize, identity: T, f: F, reduce: R) -> T
where
    T: Send + Clone,
    F: Fn(usize) -> T + Sync,
    R: Fn(T, T) -> T + Send + Sync,
{
    (0..n)
        .into_par_iter()
        .map(f)
        .reduce(|| identity.clone(), &reduce)
}

#[cfg(not(feature = "parallel"))]
pub fn map_reduce<T, F, R>(n: usize, identity: T, f: F, reduce: R) -> T
where
    T: Send + Clone,
    F: Fn(usize) -> T + Sync,
    R: Fn(T, T) -> T + Send + Sync,
{
    (0..n).map(f).fold(identity, reduce)
}

/// Pairwise sum of a small slice, sequential and deterministic.
fn pairwise(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise(&xs[..mid]) + pairwise(&xs[mid..])
        }
    }
}

/// Sum of a float slice with a fixed chunked evaluation order.
pub fn stable_sum(xs: &[f64]) -> f64 {
    if xs.len() <= CHUNK {
        return xs.iter().sum();
    }
    let chunks = xs.len().div_ceil(CHUNK);
    let partials = map_collect(chunks, |c| {
        let lo = c * CHUNK;
        let hi = usize::min(lo + CHUNK, xs.len());
        xs[lo..hi].iter().sum::<f64>()
    });
    pairwise(&partials)
}

/// Dot product with the same fixed chunking as [`stable_sum`].
pub fn stable_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= CHUNK {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let chunks = a.len().div_ceil(CHUNK);
    let partials = map_collect(chunks, |c| {
        let lo = c * CHUNK;
        let hi = usize::min(lo + CHUNK, a.len());
        a[lo..hi]
            .iter()
            .zip(&b[lo..hi])
            .map(|(x, y)| x * y)
            .sum::<f64>()
    });
    pairwise(&partials)
}
