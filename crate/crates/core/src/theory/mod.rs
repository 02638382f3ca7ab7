//! Closed-form performance of the AL/SM identifier.
//!
//! The estimation error of the feature is asymptotically complex Gaussian
//! with variance `sigma_eps^2`, so `G(tau)` is non-central chi-square(2)
//! where the expected feature is non-zero and central elsewhere. The
//! expected feature comes from [`FeatureExpectation`]; for a flat channel
//! under AL it reduces to six peaks at
//! `tau0 in {0, N/4, N/2, N/2+cp, 3N/4, 3N/4+cp}` with amplitudes
//! `kappa42 / 4 * h0^2 h1^2` times `{N+cp, N/2+cp, cp+1, 2cp+1, cp+1, N/2+2cp+1}`.
//! With several paths a product `h0(l)^2 h1(l')^2` lands at
//! `tau0 + (l + l')/2` when `l + l'` is even and nowhere otherwise, so the
//! support holds `6 L_h` shifts.

mod expectation;
mod marcum;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, ChannelRealization};
use crate::error::{Error, Result};
use crate::identifier::compute_threshold;
use crate::modem::{ScFdmaParams, StbcScheme};

pub use expectation::{FeatureExpectation, SymbolCumulants, MAX_PATHS};
pub use marcum::marcum_q1;

/// Scale applied to the expected feature before it enters the
/// non-centrality. The estimator averages over block pairs of both parities
/// and so does the expectation, so the factor is 1.
pub const PEAK_CALIBRATION: f64 = 1.0;

/// Expected entries below this fraction of the largest are treated as zero.
const SUPPORT_TOLERANCE: f64 = 1e-9;

/// Everything the performance expressions depend on.
#[derive(Debug, Clone)]
pub struct TheoryInputs {
    pub params: ScFdmaParams,
    pub channel: ChannelRealization,
    /// Per-sample noise variance.
    pub noise_var: f64,
    pub n_blocks: usize,
    pub cumulants: SymbolCumulants,
    pub p_f: f64,
    pub calibration: f64,
}

impl TheoryInputs {
    pub fn new(params: ScFdmaParams, channel: ChannelRealization, noise_var: f64, n_blocks: usize, p_f: f64) -> Self {
        TheoryInputs {
            cumulants: SymbolCumulants::of(params.constellation),
            params,
            channel,
            noise_var,
            n_blocks,
            p_f,
            calibration: PEAK_CALIBRATION,
        }
    }
}

/// Non-zero expected feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakTemplate {
    pub entries: BTreeMap<usize, Complex64>,
}

impl PeakTemplate {
    fn from_values(values: &[Complex64]) -> Self {
        let top = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| top > 0.0 && v.norm() > SUPPORT_TOLERANCE * top)
            .map(|(t, v)| (t, *v))
            .collect();
        PeakTemplate { entries }
    }

    /// Shifts with non-zero expected feature.
    pub fn support(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    pub fn get(&self, tau: usize) -> Complex64 {
        self.entries.get(&tau).copied().unwrap_or_default()
    }
}

/// Flat-channel cluster anchors for expansion factor 2 and their amplitude
/// factors.
pub fn peak_anchors(n: usize, cp: usize) -> [(usize, f64); 6] {
    let q = n / 4;
    [
        (0, (n + cp) as f64),
        (q, (n / 2 + cp) as f64),
        (2 * q, (cp + 1) as f64),
        (2 * q + cp, (2 * cp + 1) as f64),
        (3 * q, (cp + 1) as f64),
        (3 * q + cp, (n / 2 + 2 * cp + 1) as f64),
    ]
}

/// Expected feature for `scheme` on the supplied channel.
pub fn peak_template(scheme: StbcScheme, inputs: &TheoryInputs) -> Result<PeakTemplate> {
    let e = FeatureExpectation::new(scheme, &inputs.params, inputs.channel.paths)?;
    template_from(&e, inputs)
}

fn template_from(e: &FeatureExpectation, inputs: &TheoryInputs) -> Result<PeakTemplate> {
    Ok(PeakTemplate::from_values(&e.evaluate(&inputs.channel, inputs.cumulants)?))
}

/// Asymptotic variance of the feature estimate for PSK data.
///
/// `(N+cp)/N_B [ |h|^8/l^4 + 8 s |h|^6/l^3 + 20 s^2 |h|^4/l^2 + 16 s^3 |h|^2/l + 4 s^4 ]`
/// with `s` the noise variance and `l` the expansion factor; the powers of
/// `|h|` are the squared Frobenius norms of the Kronecker powers of `h`.
pub fn sigma_eps_sq(inputs: &TheoryInputs) -> Result<f64> {
    if !inputs.params.constellation.is_psk() {
        return Err(Error::UnsupportedAnalysis(format!(
            "estimator variance is only available for PSK, not {}",
            inputs.params.constellation
        )));
    }
    if inputs.n_blocks == 0 {
        return Err(Error::config("N_B must be positive"));
    }
    let lam = inputs.params.expansion();
    let h2 = inputs.channel.energy();
    let s = inputs.noise_var;
    let bracket = h2.powi(4) / lam.powi(4)
        + 8.0 * s * h2.powi(3) / lam.powi(3)
        + 20.0 * s * s * h2 * h2 / (lam * lam)
        + 16.0 * s.powi(3) * h2 / lam
        + 4.0 * s.powi(4);
    Ok(inputs.params.block_len() as f64 / inputs.n_blocks as f64 * bracket)
}

/// Detection probability for a fixed channel together with the quantities
/// it was computed from.
#[derive(Debug, Clone)]
pub struct AlDetection {
    pub probability: f64,
    pub threshold: f64,
    pub sigma_eps_sq: f64,
    /// `(tau, P_tau)` over the support of the expected feature.
    pub noncentralities: Vec<(usize, f64)>,
}

/// `P(AL | AL, h) = 1 - (1 - e^{-g/2})^{N+cp-|S|} prod_{tau in S} (1 - Q1(sqrt(P_tau), sqrt(g)))`
/// where `S` is the support of the expected feature and
/// `P_tau = 2 |A(tau)|^2 / sigma_eps^2`.
pub fn detection(inputs: &TheoryInputs) -> Result<AlDetection> {
    let e = FeatureExpectation::new(StbcScheme::Alamouti, &inputs.params, inputs.channel.paths)?;
    detection_with(&e, inputs)
}

fn detection_with(e: &FeatureExpectation, inputs: &TheoryInputs) -> Result<AlDetection> {
    let p = &inputs.params;
    let gamma = compute_threshold(inputs.p_f, p.n, p.cp)?;
    let var = sigma_eps_sq(inputs)?;
    let template = template_from(e, inputs)?;
    let support = template.support();
    if support.len() != 6 * inputs.channel.paths {
        log::debug!(
            "feature support has {} shifts, 6 L_h = {}",
            support.len(),
            6 * inputs.channel.paths
        );
    }
    let noncentralities: Vec<(usize, f64)> = support
        .iter()
        .map(|&t| {
            let a = template.get(t) * inputs.calibration;
            (t, if var > 0.0 { 2.0 * a.norm_sqr() / var } else { f64::INFINITY })
        })
        .collect();
    let null_cdf = (-(-gamma / 2.0).exp()).ln_1p();
    let mut ln_miss = (p.block_len() - support.len()) as f64 * null_cdf;
    for &(_, nc) in &noncentralities {
        let q = if nc.is_infinite() {
            1.0
        } else {
            marcum_q1(nc.sqrt(), gamma.sqrt())?
        };
        ln_miss += (-q).ln_1p();
    }
    Ok(AlDetection {
        probability: -ln_miss.exp_m1(),
        threshold: gamma,
        sigma_eps_sq: var,
        noncentralities,
    })
}

/// `P(AL | AL, h)`.
pub fn p_al_given_al_h(inputs: &TheoryInputs) -> Result<f64> {
    Ok(detection(inputs)?.probability)
}

/// Operating point for channel-averaged predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryScenario {
    pub params: ScFdmaParams,
    pub n_blocks: usize,
    pub p_f: f64,
    pub snr_db: f64,
}

impl TheoryScenario {
    /// Inputs for one channel; the noise variance follows from the mean
    /// received power `|h|^2 M / N`.
    pub fn inputs(&self, ch: ChannelRealization) -> TheoryInputs {
        let p_sig = ch.energy() / self.params.expansion();
        let noise_var = if self.snr_db == f64::INFINITY {
            0.0
        } else {
            p_sig / 10f64.powf(self.snr_db / 10.0)
        };
        TheoryInputs::new(self.params, ch, noise_var, self.n_blocks, self.p_f)
    }
}

/// Channel-averaged probabilities of correct identification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectProbability {
    pub p_al: f64,
    pub p_sm: f64,
    pub p_c: f64,
    /// Standard error of `p_c` from the channel averaging.
    pub std_err: f64,
    pub draws: usize,
}

fn summarize(samples: &[f64], p_f: f64) -> CorrectProbability {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let p_sm = 1.0 - p_f;
    CorrectProbability {
        p_al: mean,
        p_sm,
        p_c: 0.5 * (mean + p_sm),
        std_err: 0.5 * (var / n).sqrt(),
        draws: samples.len(),
    }
}

/// `P_c = (P(AL|AL) + 1 - P_f) / 2` with `P(AL|AL)` averaged over
/// `n_draws` channels from `model`.
pub fn p_correct<R: Rng + ?Sized>(
    rng: &mut R,
    scenario: &TheoryScenario,
    model: &ChannelModel,
    n_draws: usize,
) -> Result<CorrectProbability> {
    if n_draws == 0 {
        return Err(Error::config("need at least one channel draw"));
    }
    let e = FeatureExpectation::new(StbcScheme::Alamouti, &scenario.params, model.paths)?;
    let samples = (0..n_draws)
        .map(|_| {
            let ch = crate::channel::draw_channel_with(rng, model.paths, model.normalize_pdp)?;
            Ok(detection_with(&e, &scenario.inputs(ch))?.probability)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(&samples, scenario.p_f))
}

/// [`p_correct`] for one known channel.
pub fn p_correct_fixed(scenario: &TheoryScenario, ch: &ChannelRealization) -> Result<CorrectProbability> {
    let p = p_al_given_al_h(&scenario.inputs(ch.clone()))?;
    Ok(summarize(&[p], scenario.p_f))
}
