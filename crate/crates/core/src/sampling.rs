//! Reproducible parallel sampling.
//!
//! Replications are cut into fixed chunks of [`CHUNK_SIZE`]. Chunk `c` draws
//! from a ChaCha8 stream keyed by `(seed, c)`, and chunk results are merged in
//! chunk order, so the sample set and every floating-point sum are the same
//! for any worker count.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Replications per RNG stream.
pub const CHUNK_SIZE: u64 = 1 << 16;

/// The RNG for one chunk.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Exponential(rate) by inversion, using U in (0, 1] so the result is finite.
#[inline]
pub fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    -u.ln() / rate
}

/// Erlang(shape, rate) as a sum of `shape` exponentials.
#[inline]
pub fn erlang(rng: &mut ChaCha8Rng, shape: u64, rate: f64) -> f64 {
    (0..shape).map(|_| exponential(rng, rate)).sum()
}

/// Half-open range of replication indices handled by one chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chunk {
    pub index: u64,
    pub start: u64,
    pub len: u64,
}

/// Run `work` over every chunk of `n_samples` replications on `workers`
/// threads and return the per-chunk results in chunk order.
pub fn run_chunks<T, F>(n_samples: u64, seed: u64, workers: usize, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Chunk, &mut ChaCha8Rng) -> T + Sync,
{
    if n_samples == 0 {
        return Err(Error::Precondition("n_samples must be >= 1".into()));
    }
    if workers == 0 {
        return Err(Error::Precondition("workers must be >= 1".into()));
    }
    let n_chunks = n_samples.div_ceil(CHUNK_SIZE);
    let job = |index: u64| {
        let start = index * CHUNK_SIZE;
        let chunk = Chunk { index, start, len: CHUNK_SIZE.min(n_samples - start) };
        work(chunk, &mut chunk_rng(seed, index))
    };
    if workers == 1 {
        return Ok((0..n_chunks).map(job).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..n_chunks).into_par_iter().map(job).collect()))
}

/// Count replications for which `hit` returns true.
pub fn count_hits<F>(n_samples: u64, seed: u64, workers: usize, hit: F) -> Result<u64>
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let counts = run_chunks(n_samples, seed, workers, |chunk, rng| {
        (0..chunk.len).filter(|_| hit(rng)).count() as u64
    })?;
    Ok(counts.into_iter().sum())
}
