//! Deterministic data-parallel helpers.
//!
//! Work is split into fixed-size chunks whose boundaries depend only on the
//! input length, never on the worker count. Per-chunk results are combined in
//! chunk order, so every reduction has one canonical floating-point summation
//! order: results are bit-identical whether the `parallel` feature is on,
//! off, or running on any number of threads. `RAYON_NUM_THREADS` therefore
//! affects speed only.

/// Chunk length used for all point-indexed reductions.
pub const CHUNK: usize = 256;

/// Map `f` over chunk index ranges of `0..n`, returning per-chunk outputs in
/// chunk order.
pub fn map_chunks<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let ranges: Vec<_> = (0..n.div_ceil(CHUNK))
        .map(|c| (c * CHUNK)..((c + 1) * CHUNK).min(n))
        .collect();

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ranges.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ranges.into_iter().map(f).collect()
    }
}

/// Sum per-point values with the canonical chunked order: sequential within
/// each chunk, chunks combined left to right.
pub fn sum_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    map_chunks(n, |r| r.map(&f).sum::<f64>()).iter().sum()
}

/// Accumulate per-chunk gradient vectors and fold them in chunk order.
///
/// `f` fills one zeroed accumulator per chunk; the fold adds accumulators
/// entry-wise, left to right.
pub fn accumulate_vec<F>(n: usize, len: usize, f: F) -> Vec<f64>
where
    F: Fn(std::ops::Range<usize>, &mut [f64]) + Sync,
{
    let partials = map_chunks(n, |r| {
        let mut acc = vec![0.0; len];
        f(r, &mut acc);
        acc
    });
    let mut total = vec![0.0; len];
    for p in &partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}

/// Fill `out[i] = f(i)` for `i in 0..out.len()`, chunked.
pub fn fill_by<T, F>(out: &mut [T], f: F)
where
    T: Send + Sync,
    F: Fn(usize) -> T + Sync,
{
    let n = out.len();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = f(c * CHUNK + k);
                }
            });
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
    }
    #[cfg(feature = "parallel")]
    let _ = n;
}
