//! Monte Carlo plumbing: estimates with standard errors and chunked,
//! reproducible random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Random stream type used by every sampler in the crate.
pub type Rng = ChaCha8Rng;

/// Independent stream for `(seed, chunk)`; chunk indices select ChaCha streams.
pub fn chunk_rng(seed: u64, chunk: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Monte Carlo value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation divided by `sqrt(n_samples)`.
    pub stderr: f64,
    pub n_samples: u64,
}

impl MCEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut acc = Accumulator::default();
        for &s in samples {
            acc.push(s);
        }
        acc.estimate()
    }

    /// Multiplies mean and standard error by a deterministic factor.
    pub fn scaled(self, c: f64) -> Self {
        Self {
            mean: self.mean * c,
            stderr: self.stderr * c.abs(),
            n_samples: self.n_samples,
        }
    }

    /// Number of standard errors separating the estimate from `value`.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if self.stderr == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.stderr
        }
    }

    /// Distance between two independent estimates in combined standard errors.
    pub fn combined_z(&self, other: &MCEstimate) -> f64 {
        let s = self.stderr.hypot(other.stderr);
        let d = (self.mean - other.mean).abs();
        if s == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / s
        }
    }
}

/// Streaming mean/variance (Welford) with deterministic merging.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let nf = n as f64;
        self.mean += delta * other.n as f64 / nf;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / nf;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn estimate(&self) -> MCEstimate {
        let var = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        } else {
            0.0
        };
        MCEstimate {
            mean: self.mean,
            stderr: if self.n > 0 { (var / self.n as f64).sqrt() } else { 0.0 },
            n_samples: self.n,
        }
    }
}

/// Fixed work partition: `n_samples` split into chunks of `chunk_size`, chunk
/// `k` always drawing from `chunk_rng(seed, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunking {
    pub seed: u64,
    pub chunk_size: usize,
}

impl Chunking {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            chunk_size: 4096,
        }
    }

    /// Runs `work(rng, count, chunk_index)` on every chunk in parallel and
    /// returns the results in chunk order.
    pub fn map<T, F>(&self, n_samples: usize, work: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut Rng, usize, u64) -> T + Sync + Send,
    {
        let size = self.chunk_size.max(1);
        let n_chunks = n_samples.div_ceil(size);
        (0..n_chunks)
            .into_par_iter()
            .map(|k| {
                let count = size.min(n_samples - k * size);
                let mut rng = chunk_rng(self.seed, k as u64);
                work(&mut rng, count, k as u64)
            })
            .collect()
    }

    /// Accumulates per-chunk statistics and merges them in chunk order, so the
    /// result is independent of the worker count.
    pub fn estimate<F>(&self, n_samples: usize, sample: F) -> Accumulator
    where
        F: Fn(&mut Rng) -> f64 + Sync + Send,
    {
        let parts = self.map(n_samples, |rng, count, _| {
            let mut acc = Accumulator::default();
            for _ in 0..count {
                acc.push(sample(rng));
            }
            acc
        });
        let mut total = Accumulator::default();
        for p in &parts {
            total.merge(p);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn stderr_matches_definition() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let e = MCEstimate::from_samples(&xs);
        let sd = (xs.iter().map(|x| (x - 2.5f64).powi(2)).sum::<f64>() / 3.0).sqrt();
        assert!((e.mean - 2.5).abs() < 1e-15);
        assert!((e.stderr - sd / 2.0).abs() < 1e-15);
        assert_eq!(e.n_samples, 4);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Accumulator::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Accumulator::default();
        let mut b = Accumulator::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean() - whole.mean()).abs() < 1e-12);
        assert!((a.estimate().stderr - whole.estimate().stderr).abs() < 1e-12);
    }

    #[test]
    fn chunked_estimate_is_reproducible() {
        let ch = Chunking { seed: 7, chunk_size: 100 };
        let a = ch.estimate(1234, |r| r.random::<f64>()).estimate();
        let b = ch.estimate(1234, |r| r.random::<f64>()).estimate();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.n_samples, 1234);
    }

    #[test]
    fn streams_differ_between_chunks() {
        let mut a = chunk_rng(1, 0);
        let mut b = chunk_rng(1, 1);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
    }
}
