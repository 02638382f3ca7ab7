use num_complex::Complex64;
use rayon::prelude::*;

use super::FeatureVector;
use crate::error::{Error, Result};
use crate::modem::ScFdmaParams;

/// Block lag of the variance-normalising statistic.
pub const DEFAULT_VARIANCE_LAG: usize = 4;

/// Blocks per parallel work unit; partial sums are combined in chunk order so
/// results do not depend on the thread count.
const CHUNK_BLOCKS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureEstimator {
    pub n: usize,
    pub cp: usize,
    pub variance_lag: usize,
}

/// Squared samples split into real and imaginary parts, forward and
/// reversed, so that every anti-diagonal sum becomes a forward dot product.
struct Squared {
    re: Vec<f64>,
    im: Vec<f64>,
    rev_re: Vec<f64>,
    rev_im: Vec<f64>,
}

impl Squared {
    fn new(y: &[Complex64]) -> Self {
        let (re, im): (Vec<f64>, Vec<f64>) = y
            .iter()
            .map(|v| {
                let s = v * v;
                (s.re, s.im)
            })
            .unzip();
        let rev_re = re.iter().rev().copied().collect();
        let rev_im = im.iter().rev().copied().collect();
        Squared { re, im, rev_re, rev_im }
    }

    /// `sum_{j < len} e[a + j] * e[K - 1 - r - j]`, i.e. the product with the
    /// reversed sequence starting at reversed index `r`.
    #[inline]
    fn anti_dot(&self, a: usize, r: usize, len: usize) -> (f64, f64) {
        let ar = &self.re[a..a + len];
        let ai = &self.im[a..a + len];
        let br = &self.rev_re[r..r + len];
        let bi = &self.rev_im[r..r + len];
        let mut sr = [0.0f64; 4];
        let mut si = [0.0f64; 4];
        let chunks = len / 4;
        for c in 0..chunks {
            let o = 4 * c;
            for l in 0..4 {
                let (xr, xi, yr, yi) = (ar[o + l], ai[o + l], br[o + l], bi[o + l]);
                sr[l] += xr * yr - xi * yi;
                si[l] += xr * yi + xi * yr;
            }
        }
        let mut tr = (sr[0] + sr[1]) + (sr[2] + sr[3]);
        let mut ti = (si[0] + si[1]) + (si[2] + si[3]);
        for j in 4 * chunks..len {
            tr += ar[j] * br[j] - ai[j] * bi[j];
            ti += ar[j] * bi[j] + ai[j] * br[j];
        }
        (tr, ti)
    }
}

impl FeatureEstimator {
    pub fn new(params: &ScFdmaParams) -> Self {
        FeatureEstimator {
            n: params.n,
            cp: params.cp,
            variance_lag: DEFAULT_VARIANCE_LAG,
        }
    }

    pub fn with_variance_lag(mut self, lag: usize) -> Self {
        self.variance_lag = lag;
        self
    }

    fn block_len(&self) -> usize {
        self.n + self.cp
    }

    /// Samples required: six blocks.
    pub fn min_samples(&self) -> usize {
        (self.variance_lag.max(1) + 2) * self.block_len()
    }

    /// Block pairs `(q, q + lag)` available at shift `tau`.
    pub fn pairs(&self, len: usize, tau: usize, lag: usize) -> usize {
        ((len - tau) / self.block_len()).saturating_sub(lag)
    }

    /// Unnormalised sums over `q` of the block-pair products for every shift.
    fn lag_sums(&self, e: &Squared, len: usize, lag: usize) -> Vec<Complex64> {
        let b = self.block_len();
        let cp = self.cp;
        let max_pairs = self.pairs(len, 0, lag);
        let pairs_at: Vec<usize> = (0..b).map(|t| self.pairs(len, t, lag)).collect();
        let chunks: Vec<Vec<(f64, f64)>> = (0..max_pairs.div_ceil(CHUNK_BLOCKS))
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![(0.0, 0.0); b];
                let q_end = ((c + 1) * CHUNK_BLOCKS).min(max_pairs);
                for q in c * CHUNK_BLOCKS..q_end {
                    for (tau, slot) in acc.iter_mut().enumerate() {
                        if q >= pairs_at[tau] {
                            break;
                        }
                        let a0 = q * b + tau;
                        let p = (q + lag) * b + tau;
                        // n = 0..=cp pairs with p + 2cp - n.
                        let (r1, i1) = e.anti_dot(a0, len - 1 - p - 2 * cp, cp + 1);
                        // n = cp+1..b pairs with p + b + cp - n.
                        let (r2, i2) = e.anti_dot(a0 + cp + 1, len - p - b, self.n - 1);
                        slot.0 += r1 + r2;
                        slot.1 += i1 + i2;
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![Complex64::new(0.0, 0.0); b];
        for part in chunks {
            for (t, (r, i)) in total.iter_mut().zip(part) {
                *t += Complex64::new(r, i);
            }
        }
        for (tau, t) in total.iter_mut().enumerate() {
            *t /= pairs_at[tau] as f64;
        }
        total
    }

    pub fn estimate(&self, samples: &[Complex64]) -> Result<FeatureVector> {
        if self.n == 0 || self.cp >= self.n || self.variance_lag == 0 {
            return Err(Error::config("invalid estimator geometry"));
        }
        let b = self.block_len();
        if samples.len() < self.min_samples() {
            return Err(Error::invalid(format!(
                "need at least {} samples ({} blocks of {b}), got {}",
                self.min_samples(),
                self.min_samples() / b,
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite received samples"));
        }
        let e = Squared::new(samples);
        let len = samples.len();
        let a_r = self.lag_sums(&e, len, 1);
        let a_r_prime = self.lag_sums(&e, len, self.variance_lag);
        let den = a_r_prime.iter().map(|a| a.norm_sqr()).sum::<f64>() / b as f64;
        if !(den > 0.0 && den.is_finite()) {
            return Err(Error::invalid("degenerate input: variance estimate is zero"));
        }
        let g: Vec<f64> = a_r.iter().map(|a| 2.0 * a.norm_sqr() / den).collect();
        let (argmax, gamma_max) =
            g.iter()
                .copied()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (t, v)| if v > best.1 { (t, v) } else { best });
        Ok(FeatureVector {
            a_r,
            a_r_prime,
            g,
            gamma_max,
            argmax,
            n_blocks_used: len / b,
        })
    }
}

/// Feature vector with the default variance lag.
pub fn estimate_feature(samples: &[Complex64], params: &ScFdmaParams) -> Result<FeatureVector> {
    FeatureEstimator::new(params).estimate(samples)
}
