//! Scrambled Halton points and replicated quasi-Monte-Carlo estimates.
//!
//! Each replicate uses its own random digit permutations, so the spread of
//! replicate means gives an honest standard error. Sums are taken over fixed
//! shards and merged in shard order, which keeps results bit-identical for
//! any thread count.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

pub const DEFAULT_REPLICATES: usize = 8;
const SHARD: usize = 1024;

/// One scrambled Halton sequence in `[0,1)^dim`.
#[derive(Clone, Debug)]
pub struct Halton {
    dim: usize,
    // perms[d][j] permutes digit j of coordinate d.
    perms: Vec<Vec<Vec<u32>>>,
}

impl Halton {
    pub fn new(dim: usize, seed: u64, replicate: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton dimension {dim} too large");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replicate);
        let perms = PRIMES[..dim]
            .iter()
            .map(|&b| {
                let digits = (53.0 / (b as f64).log2()).ceil() as usize;
                (0..digits)
                    .map(|_| {
                        let mut p: Vec<u32> = (0..b).collect();
                        p.shuffle(&mut rng);
                        p
                    })
                    .collect()
            })
            .collect();
        Halton { dim, perms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, index: u64, out: &mut [f64]) {
        for (d, o) in out.iter_mut().enumerate().take(self.dim) {
            let b = PRIMES[d] as u64;
            let inv = 1.0 / b as f64;
            let mut i = index;
            let mut scale = inv;
            let mut x = 0.0;
            for perm in &self.perms[d] {
                let digit = (i % b) as usize;
                i /= b;
                x += perm[digit] as f64 * scale;
                scale *= inv;
            }
            *o = x.min(1.0 - f64::EPSILON);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn scaled(self, c: f64) -> Estimate {
        Estimate {
            mean: self.mean * c,
            stderr: self.stderr * c.abs(),
            samples: self.samples,
        }
    }
}

/// Sum of `f` over points `lo..hi` of one replicate, in fixed shards.
fn replicate_sums<F>(h: &Halton, count: usize, f: &F) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let shards = count.div_ceil(SHARD);
    let parts: Vec<Vec<f64>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut buf = vec![0.0; h.dim()];
            let mut acc: Vec<f64> = Vec::new();
            for i in s * SHARD..((s + 1) * SHARD).min(count) {
                h.point(i as u64, &mut buf);
                let v = f(&buf);
                if acc.is_empty() {
                    acc = vec![0.0; v.len()];
                }
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
            }
            acc
        })
        .collect();
    let mut total: Vec<f64> = Vec::new();
    for p in parts {
        if total.is_empty() {
            total = vec![0.0; p.len()];
        }
        for (a, x) in total.iter_mut().zip(p) {
            *a += x;
        }
    }
    total
}

/// Means of a vector-valued integrand over `[0,1)^dim`, each with a
/// replicate standard error. `n` is the total point budget.
pub fn integrate_many<F>(dim: usize, n: usize, seed: u64, f: F) -> Vec<Estimate>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let reps = DEFAULT_REPLICATES;
    let per = n.div_ceil(reps).max(1);
    let means: Vec<Vec<f64>> = (0..reps)
        .map(|r| {
            let h = Halton::new(dim, seed, r as u64);
            replicate_sums(&h, per, &f)
                .into_iter()
                .map(|s| s / per as f64)
                .collect()
        })
        .collect();
    let width = means.iter().map(Vec::len).max().unwrap_or(0);
    (0..width)
        .map(|k| {
            let vals: Vec<f64> = means.iter().map(|m| m.get(k).copied().unwrap_or(0.0)).collect();
            let mean = vals.iter().sum::<f64>() / reps as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
            Estimate {
                mean,
                stderr: (var / reps as f64).sqrt(),
                samples: per * reps,
            }
        })
        .collect()
}

/// Scalar version of [`integrate_many`].
pub fn integrate<F>(dim: usize, n: usize, seed: u64, f: F) -> Estimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    integrate_many(dim, n, seed, |u| vec![f(u)])
        .into_iter()
        .next()
        .unwrap_or(Estimate {
            mean: 0.0,
            stderr: 0.0,
            samples: 0,
        })
}

/// The first `n` points of replicate 0, for sampling rather than averaging.
pub fn points(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let h = Halton::new(dim, seed, 0);
    (0..n)
        .map(|i| {
            let mut p = vec![0.0; dim];
            h.point(i as u64, &mut p);
            p
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_lie_in_unit_cube() {
        for p in points(5, 500, 7) {
            assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
    }

    #[test]
    fn polynomial_integral() {
        let e = integrate(3, 1 << 14, 1, |u| u[0] * u[1] + u[2] * u[2]);
        let exact = 0.25 + 1.0 / 3.0;
        assert!((e.mean - exact).abs() < 1e-3);
        assert!((e.mean - exact).abs() < 5.0 * e.stderr + 1e-6);
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let f = |u: &[f64]| (u[0] * 10.0).sin() * u[1];
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| integrate(2, 10_000, 3, f));
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| integrate(2, 10_000, 3, f));
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn seeds_change_scramble() {
        assert_ne!(points(2, 3, 1), points(2, 3, 2));
    }

    #[test]
    fn coordinates_are_equidistributed() {
        let pts = points(2, 4096, 11);
        for d in 0..2 {
            let mut bins = [0usize; 8];
            for p in &pts {
                bins[(p[d] * 8.0) as usize] += 1;
            }
            assert!(bins.iter().all(|&b| (500..=524).contains(&b)), "{bins:?}");
        }
    }
}
