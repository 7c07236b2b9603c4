//! Deterministic, thread-count independent Monte-Carlo accumulation.
//!
//! Sample `i` is drawn from its own ChaCha stream (`stream = i`) keyed by the
//! seed, so any sample can be regenerated without replaying earlier ones.
//! Samples are summed in fixed-size chunks with Neumaier compensation and
//! the chunk totals are combined in index order, which makes the result
//! bit-identical for any rayon pool size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const CHUNK: usize = 2048;

/// Per-sample generator for `(seed, index)`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sample mean and its standard error, per component.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n_samples: usize,
}

/// Sample mean with the full covariance matrix of the mean (row-major,
/// `dim x dim`), for standard errors of arbitrary linear combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct CovEstimate {
    pub mean: Vec<f64>,
    pub cov: Vec<f64>,
    pub n_samples: usize,
}

impl CovEstimate {
    /// Standard error of `w . mean`.
    pub fn linear_std_error(&self, w: &[f64]) -> f64 {
        let d = self.mean.len();
        let mut v = 0.0;
        for i in 0..d {
            if w[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                v += w[i] * self.cov[i * d + j] * w[j];
            }
        }
        v.max(0.0).sqrt()
    }
}

/// Like [`mean_over`] but also accumulates cross moments.
pub fn mean_cov_over<F>(n: usize, dim: usize, f: F) -> CovEstimate
where
    F: Fn(u64, &mut [f64]) + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let chunks: Vec<(Vec<Neumaier>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = vec![Neumaier::default(); dim];
            let mut s2 = vec![0.0; dim * dim];
            let mut buf = vec![0.0; dim];
            let end = ((c + 1) * CHUNK).min(n);
            for i in c * CHUNK..end {
                f(i as u64, &mut buf);
                for k in 0..dim {
                    s[k].add(buf[k]);
                    let bk = buf[k];
                    if bk != 0.0 {
                        let row = &mut s2[k * dim..(k + 1) * dim];
                        for (r, b) in row.iter_mut().zip(buf.iter()) {
                            *r += bk * b;
                        }
                    }
                }
            }
            (s, s2)
        })
        .collect();

    let mut total = vec![Neumaier::default(); dim];
    let mut total2 = vec![Neumaier::default(); dim * dim];
    for (s, s2) in &chunks {
        for k in 0..dim {
            total[k].add(s[k].value());
        }
        for (t, v) in total2.iter_mut().zip(s2.iter()) {
            t.add(*v);
        }
    }
    let nf = n as f64;
    let mean: Vec<f64> = total.iter().map(|t| t.value() / nf).collect();
    let mut cov = vec![0.0; dim * dim];
    if n >= 2 {
        for i in 0..dim {
            for j in 0..dim {
                let c = (total2[i * dim + j].value() / nf - mean[i] * mean[j]) * nf / (nf - 1.0);
                cov[i * dim + j] = c / nf;
            }
        }
    }
    CovEstimate {
        mean,
        cov,
        n_samples: n,
    }
}

/// Averages `f(index, out)` over `n` samples. `f` fills `out` (length `dim`)
/// with the per-sample observables.
pub fn mean_over<F>(n: usize, dim: usize, f: F) -> Estimate
where
    F: Fn(u64, &mut [f64]) + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let chunks: Vec<(Vec<Neumaier>, Vec<Neumaier>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = vec![Neumaier::default(); dim];
            let mut s2 = vec![Neumaier::default(); dim];
            let mut buf = vec![0.0; dim];
            let end = ((c + 1) * CHUNK).min(n);
            for i in c * CHUNK..end {
                f(i as u64, &mut buf);
                for k in 0..dim {
                    s[k].add(buf[k]);
                    s2[k].add(buf[k] * buf[k]);
                }
            }
            (s, s2)
        })
        .collect();

    let mut total = vec![Neumaier::default(); dim];
    let mut total2 = vec![Neumaier::default(); dim];
    for (s, s2) in &chunks {
        for k in 0..dim {
            total[k].add(s[k].value());
            total2[k].add(s2[k].value());
        }
    }
    let nf = n as f64;
    let mean: Vec<f64> = total.iter().map(|t| t.value() / nf).collect();
    let std_error = total2
        .iter()
        .zip(&mean)
        .map(|(t2, m)| {
            if n < 2 {
                return 0.0;
            }
            let var = ((t2.value() / nf) - m * m).max(0.0) * nf / (nf - 1.0);
            (var / nf).sqrt()
        })
        .collect();
    Estimate {
        mean,
        std_error,
        n_samples: n,
    }
}
