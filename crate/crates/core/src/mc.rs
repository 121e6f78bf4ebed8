//! Chunked, reproducible Monte Carlo.
//!
//! A sample budget is split into fixed-size chunks; chunk `i` draws from the
//! ChaCha8 stream `(seed, i)`. Chunks may run on any number of threads and
//! are merged in chunk order, so results depend only on the seed and the
//! budget.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::special_math::rng::stream_rng;

/// Samples per chunk.
pub const CHUNK_SIZE: usize = 1 << 14;

/// Accumulators that can be combined in a fixed order.
pub trait Merge: Send {
    fn merge(&mut self, other: Self);
}

/// Running mean and variance (Welford / Chan).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.mean,
            std_error: self.std_error(),
            samples: self.n,
        }
    }
}

impl Merge for Moments {
    fn merge(&mut self, o: Self) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64 * o.n as f64 / n as f64);
        self.n = n;
    }
}

impl<const K: usize> Merge for [Moments; K] {
    fn merge(&mut self, o: Self) {
        for (a, b) in self.iter_mut().zip(o) {
            a.merge(b);
        }
    }
}

impl<T: Send> Merge for Vec<T> {
    fn merge(&mut self, o: Self) {
        self.extend(o);
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl Estimate {
    /// `|self - target| <= k * se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

/// Runs `work(rng, count)` over `ceil(samples / CHUNK_SIZE)` chunks and
/// merges the results in chunk order.
pub fn run_chunked<A, F>(samples: usize, seed: u64, work: F) -> A
where
    A: Merge + Default,
    F: Fn(&mut ChaCha8Rng, usize) -> A + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            let mut rng = stream_rng(seed, c as u64);
            work(&mut rng, count)
        })
        .collect();
    let mut out = A::default();
    for p in parts {
        out.merge(p);
    }
    out
}

/// Runs `work(index)` for every index in `0..count` in parallel and returns
/// the results in index order.
pub fn run_indexed<T, F>(count: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..count).into_par_iter().map(|i| work(i)).collect()
}

/// Wilson score interval for `successes / trials` at `z` standard errors.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
