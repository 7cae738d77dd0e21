//! Monte Carlo plumbing: per-path RNG substreams, the parallel/sequential
//! path map, and compensated reductions.
//!
//! Path `i` always draws from ChaCha stream `i` (or stream `i/2` with a sign
//! flip when antithetic), so a simulation is reproducible bit-for-bit for a
//! fixed seed no matter how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::special::kahan_sum;

/// RNG for one substream of a seeded generator.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard-normal source for one path, carrying the antithetic sign.
pub struct PathDraws {
    rng: ChaCha8Rng,
    sign: f64,
}

impl PathDraws {
    pub fn new(seed: u64, path: usize, antithetic: bool) -> Self {
        if antithetic {
            PathDraws {
                rng: path_rng(seed, (path / 2) as u64),
                sign: if path.is_multiple_of(2) { 1.0 } else { -1.0 },
            }
        } else {
            PathDraws {
                rng: path_rng(seed, path as u64),
                sign: 1.0,
            }
        }
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.sign * z
    }
}

/// Apply `f` to every path index, in parallel when the `parallel` feature is
/// on. Results come back in path order either way.
#[cfg(feature = "parallel")]
pub fn map_paths<T, F>(n_paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n_paths).into_par_iter().map(f).collect()
}

/// Apply `f` to every path index, sequentially (the `parallel` feature is off).
#[cfg(not(feature = "parallel"))]
pub fn map_paths<T, F>(n_paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n_paths).map(f).collect()
}

/// Always-sequential path map, kept around so benchmarks can compare the two
/// schedules inside one build.
pub fn map_paths_sequential<T, F>(n_paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n_paths).map(f).collect()
}

/// Sample mean and standard error of a Monte Carlo batch, reduced in path
/// order with compensated summation.
#[derive(Debug, Clone, Copy)]
pub struct McStats {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

pub fn mc_stats(values: &[f64]) -> McStats {
    let n = values.len();
    assert!(n > 0, "mc_stats on empty batch");
    let mean = kahan_sum(values.iter().copied()) / n as f64;
    let var = if n > 1 {
        kahan_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n as f64 - 1.0)
    } else {
        0.0
    };
    McStats {
        mean,
        std_err: (var / n as f64).sqrt().max(0.0),
        n,
    }
}
