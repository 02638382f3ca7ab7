//! Blind AL/SM identification from the received samples alone.
//!
//! For every shift `tau` the received sequence is cut into blocks
//! `r_q(n) = y(n + tau + q (N + cp))`. The feature pairs each block with the
//! conjugate-symmetric re-indexing of the next one,
//!
//! ```text
//! A(tau) = 1/P sum_q sum_n r_q(n)^2 r_{q+1}(rev(n))^2,   rev(n) = ((cp - n) mod N) + cp
//! ```
//!
//! and is non-zero in expectation only for Alamouti signals. The same sum with
//! a block lag of 4 (`A'`) has zero mean for both schemes and estimates the
//! estimator variance, giving the normalised statistic
//! `G(tau) = 2 |A(tau)|^2 / mean_tau' |A'(tau')|^2`.
//! Its maximum is compared with a CFAR threshold.

mod estimator;
mod threshold;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modem::{ScFdmaParams, StbcScheme};

pub use estimator::{estimate_feature, FeatureEstimator, DEFAULT_VARIANCE_LAG};
pub use threshold::{compute_threshold, max_statistic_cdf};

/// Minimum number of whole blocks at any shift.
pub const MIN_BLOCKS_PER_SHIFT: usize = DEFAULT_VARIANCE_LAG + 1;

/// Index of the conjugate time-reversed sample: `((cp - n) mod N) + cp`,
/// always in `cp..N + cp`.
pub fn conj_time_reverse_index(n: usize, n_sub: usize, cp: usize) -> usize {
    debug_assert!(n < n_sub + cp);
    (cp + n_sub - n % n_sub) % n_sub + cp
}

/// Splits `seq` advanced by `tau` into whole blocks of `block_len`; the
/// trailing partial block is dropped.
pub fn reblock(seq: &[Complex64], tau: usize, block_len: usize) -> Result<Vec<&[Complex64]>> {
    if block_len == 0 {
        return Err(Error::invalid("block length must be positive"));
    }
    let avail = seq.len().saturating_sub(tau);
    let count = avail / block_len;
    if count < MIN_BLOCKS_PER_SHIFT {
        return Err(Error::invalid(format!(
            "{} samples hold only {count} blocks of {block_len} at shift {tau}; need {MIN_BLOCKS_PER_SHIFT}",
            seq.len()
        )));
    }
    Ok(seq[tau..tau + count * block_len].chunks_exact(block_len).collect())
}

/// Feature sequences over `tau = 0..N + cp`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub a_r: Vec<Complex64>,
    pub a_r_prime: Vec<Complex64>,
    pub g: Vec<f64>,
    pub gamma_max: f64,
    pub argmax: usize,
    /// Whole blocks available at `tau = 0`.
    pub n_blocks_used: usize,
}

impl FeatureVector {
    /// `(N + cp)^-1 sum |A'(tau')|^2`.
    pub fn variance_estimate(&self) -> f64 {
        self.a_r_prime.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.a_r_prime.len() as f64
    }

    /// The `count` largest `|A(tau)|` as `(tau, magnitude)`, sorted by `tau`.
    pub fn peaks(&self, count: usize) -> Vec<(usize, f64)> {
        let mut idx: Vec<usize> = (0..self.a_r.len()).collect();
        idx.sort_by(|&a, &b| self.a_r[b].norm().total_cmp(&self.a_r[a].norm()));
        let mut top: Vec<(usize, f64)> = idx.into_iter().take(count).map(|t| (t, self.a_r[t].norm())).collect();
        top.sort_by_key(|p| p.0);
        top
    }
}

/// Outcome of one identification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    #[serde(rename = "gamma_max")]
    pub statistic: f64,
    pub threshold: f64,
    pub declared: StbcScheme,
    #[serde(rename = "p_f")]
    pub p_f_target: Option<f64>,
    /// The six largest `(tau, |A(tau)|)`.
    pub peaks: Vec<(usize, f64)>,
    pub params: Option<ScFdmaParams>,
    pub seed: Option<u64>,
}

/// Number of peaks echoed in a report.
pub const REPORTED_PEAKS: usize = 6;

/// AL iff `Gamma > gamma`; a tie declares SM.
pub fn decide(fv: &FeatureVector, threshold: f64) -> DecisionReport {
    let declared = if fv.gamma_max > threshold {
        StbcScheme::Alamouti
    } else {
        StbcScheme::SpatialMultiplexing
    };
    DecisionReport {
        statistic: fv.gamma_max,
        threshold,
        declared,
        p_f_target: None,
        peaks: fv.peaks(REPORTED_PEAKS),
        params: None,
        seed: None,
    }
}

/// Feature estimation, threshold and decision in one call.
pub fn identify(samples: &[Complex64], params: &ScFdmaParams, p_f: f64) -> Result<DecisionReport> {
    let gamma = compute_threshold(p_f, params.n, params.cp)?;
    let fv = estimate_feature(samples, params)?;
    let mut report = decide(&fv, gamma);
    report.p_f_target = Some(p_f);
    report.params = Some(*params);
    Ok(report)
}
