//! 2x1 frequency-selective Rayleigh channel, receiver impairments and noise.

mod fading;
mod filter;
mod impair;
mod noise;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modem::TxFrame;

pub use fading::{DopplerUpdate, FadingProcess, DEFAULT_OSCILLATORS};
pub use filter::Butterworth;
pub use impair::{apply_impairments, fractional_delay, frequency_offset, FRACTIONAL_DELAY_TAPS};
pub use noise::add_noise;

/// Decay constant of the exponential power delay profile `exp(-l / 5)`.
pub const PDP_DECAY: f64 = 5.0;

/// One draw of the channel between both transmit antennas and the receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    /// `[h0(0..L), h1(0..L)]`.
    pub taps: Vec<Complex64>,
    pub paths: usize,
    /// Per-tap variance used for the draw.
    pub pdp: Vec<f64>,
    /// Time variation; `taps` then hold the gains at sample 0.
    #[serde(skip)]
    pub fading: Option<FadingProcess>,
}

impl ChannelRealization {
    /// Deterministic channel from explicit taps `[h0.., h1..]`.
    pub fn from_taps(taps: Vec<Complex64>) -> Result<Self> {
        if taps.is_empty() || !taps.len().is_multiple_of(2) {
            return Err(Error::config("tap vector must hold 2 * L_h entries"));
        }
        let paths = taps.len() / 2;
        Ok(ChannelRealization {
            taps,
            paths,
            pdp: vec![f64::NAN; paths],
            fading: None,
        })
    }

    /// Flat channel `h0 = h1 = 1`.
    pub fn flat_unit() -> Self {
        Self::from_taps(vec![Complex64::new(1.0, 0.0); 2]).expect("two taps")
    }

    pub fn antenna(&self, f: usize) -> &[Complex64] {
        &self.taps[f * self.paths..(f + 1) * self.paths]
    }

    /// Sum of squared tap magnitudes over both antennas.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|h| h.norm_sqr()).sum()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.taps.iter_mut().for_each(|h| *h *= c);
        out.fading = None;
        out
    }
}

/// Exponential power delay profile, optionally normalised to unit sum.
pub fn power_delay_profile(paths: usize, normalize: bool) -> Vec<f64> {
    let mut pdp: Vec<f64> = (0..paths).map(|l| (-(l as f64) / PDP_DECAY).exp()).collect();
    if normalize {
        let s: f64 = pdp.iter().sum();
        pdp.iter_mut().for_each(|v| *v /= s);
    }
    pdp
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Independent zero-mean complex Gaussian taps with the unit-sum
/// exponential profile.
pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R, paths: usize) -> Result<ChannelRealization> {
    draw_channel_with(rng, paths, true)
}

/// As [`draw_channel`]; `normalize = false` keeps the raw `exp(-l/5)`
/// variances.
pub fn draw_channel_with<R: Rng + ?Sized>(rng: &mut R, paths: usize, normalize: bool) -> Result<ChannelRealization> {
    if paths == 0 {
        return Err(Error::config("channel needs at least one path"));
    }
    let pdp = power_delay_profile(paths, normalize);
    let taps = (0..2).flat_map(|_| pdp.iter()).map(|&v| complex_gaussian(rng, v)).collect();
    Ok(ChannelRealization {
        taps,
        paths,
        pdp,
        fading: None,
    })
}

/// `y(k) = sum_f sum_l h_f(l) x_f(k - l)`, with zero input before `k = 0`.
/// Uses the time-varying gains when the realization carries a fading process.
pub fn apply_channel(frame: &TxFrame, ch: &ChannelRealization) -> Result<Vec<Complex64>> {
    apply_channel_to(&frame.antennas, ch)
}

pub fn apply_channel_to(antennas: &[Vec<Complex64>; 2], ch: &ChannelRealization) -> Result<Vec<Complex64>> {
    if ch.taps.len() != 2 * ch.paths || ch.paths == 0 {
        return Err(Error::invalid("inconsistent channel tap count"));
    }
    if antennas[0].len() != antennas[1].len() {
        return Err(Error::invalid("antenna sequences differ in length"));
    }
    if let Some(fp) = &ch.fading {
        return fp.apply(antennas, ch.paths);
    }
    let len = antennas[0].len();
    let mut y = vec![Complex64::new(0.0, 0.0); len];
    for (f, x) in antennas.iter().enumerate() {
        for (l, &h) in ch.antenna(f).iter().enumerate() {
            if h == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (yk, &xk) in y[l.min(len)..].iter_mut().zip(x.iter()) {
                *yk += h * xk;
            }
        }
    }
    Ok(y)
}

/// Residual synchronisation and mobility impairments plus the SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentParams {
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
    /// Fractional timing offset in sampling intervals, `0 <= mu < 1`.
    #[serde(default)]
    pub timing_offset: f64,
    /// Carrier offset normalised to the subcarrier spacing.
    #[serde(default)]
    pub freq_offset: f64,
    /// Maximum Doppler shift normalised to the subcarrier spacing.
    #[serde(default)]
    pub doppler: f64,
}

impl ImpairmentParams {
    pub fn at_snr(snr_db: f64) -> Self {
        ImpairmentParams {
            snr_db,
            timing_offset: 0.0,
            freq_offset: 0.0,
            doppler: 0.0,
        }
    }

    pub fn noiseless() -> Self {
        Self::at_snr(f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_nan() {
            return Err(Error::config("SNR must not be NaN"));
        }
        if !(0.0..1.0).contains(&self.timing_offset) {
            return Err(Error::config(format!("timing offset {} outside [0, 1)", self.timing_offset)));
        }
        if !self.freq_offset.is_finite() || !self.doppler.is_finite() {
            return Err(Error::config("frequency offset and Doppler must be finite"));
        }
        if self.doppler < 0.0 {
            return Err(Error::config("Doppler frequency must be non-negative"));
        }
        Ok(())
    }
}

/// Channel and receiver-front-end settings that stay fixed over a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub paths: usize,
    /// Normalise the delay profile to unit power per antenna.
    #[serde(default = "default_true")]
    pub normalize_pdp: bool,
    #[serde(default)]
    pub doppler_update: DopplerUpdate,
    #[serde(default = "default_oscillators")]
    pub oscillators: usize,
    /// Optional receive low-pass; the SNR is then measured at its output.
    #[serde(default)]
    pub filter: Option<Butterworth>,
}

fn default_true() -> bool {
    true
}

fn default_oscillators() -> usize {
    DEFAULT_OSCILLATORS
}

impl ChannelModel {
    pub fn rayleigh(paths: usize) -> Self {
        ChannelModel {
            paths,
            normalize_pdp: true,
            doppler_update: DopplerUpdate::PerSample,
            oscillators: DEFAULT_OSCILLATORS,
            filter: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::config("channel needs at least one path"));
        }
        if self.oscillators == 0 {
            return Err(Error::config("fading process needs at least one oscillator"));
        }
        if let Some(f) = &self.filter {
            f.validate()?;
        }
        Ok(())
    }

    /// Draws a realization, time-varying when `doppler > 0`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, doppler: f64, n: usize, block_len: usize) -> Result<ChannelRealization> {
        if doppler > 0.0 {
            let pdp = power_delay_profile(self.paths, self.normalize_pdp);
            let fp = FadingProcess::draw(
                rng,
                &pdp,
                doppler / n as f64,
                self.oscillators,
                self.doppler_update,
                block_len,
            );
            Ok(ChannelRealization {
                taps: fp.gains_at(0),
                paths: self.paths,
                pdp,
                fading: Some(fp),
            })
        } else {
            draw_channel_with(rng, self.paths, self.normalize_pdp)
        }
    }
}

/// Single-antenna received sequence.
#[derive(Debug, Clone)]
pub struct RxSequence {
    pub samples: Vec<Complex64>,
    /// Per-sample noise variance actually added.
    pub noise_var: f64,
    pub channel: Option<ChannelRealization>,
    pub impairments: ImpairmentParams,
}

/// Channel, impairments and noise applied to a transmit frame.
pub fn receive<R: Rng + ?Sized>(
    rng: &mut R,
    frame: &TxFrame,
    ch: &ChannelRealization,
    imp: &ImpairmentParams,
    filter: Option<&Butterworth>,
) -> Result<RxSequence> {
    imp.validate()?;
    let y = apply_channel(frame, ch)?;
    let y = apply_impairments(y, imp, &frame.params)?;
    let mut rx = match filter {
        Some(bw) => noise::add_filtered_noise(rng, y, imp.snr_db, bw)?,
        None => add_noise(rng, y, imp.snr_db)?,
    };
    rx.channel = Some(ch.clone());
    rx.impairments = *imp;
    Ok(rx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Constellation;
    use crate::modem::{synthesize_frame, ScFdmaParams, StbcScheme};
    use crate::rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn frame(scheme: StbcScheme, blocks: usize) -> TxFrame {
        let p = ScFdmaParams::interleaved(32, 2, 4, Constellation::Qpsk).unwrap();
        synthesize_frame(&mut rng::from_seed(77), scheme, &p, blocks).unwrap()
    }

    #[test]
    fn single_path_draw() {
        let ch = draw_channel(&mut rng::from_seed(1), 1).unwrap();
        assert_eq!(ch.taps.len(), 2);
        assert_eq!(ch.pdp, vec![1.0]);
        assert!(draw_channel(&mut rng::from_seed(1), 0).is_err());
    }

    #[test]
    fn draws_replay() {
        let a = draw_channel(&mut rng::from_seed(5), 3).unwrap();
        let b = draw_channel(&mut rng::from_seed(5), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn profile_ratios() {
        let mut r = rng::from_seed(17);
        let trials = 100_000;
        let mut acc = [0.0; 3];
        for _ in 0..trials {
            let ch = draw_channel_with(&mut r, 3, false).unwrap();
            for l in 0..3 {
                acc[l] += ch.antenna(0)[l].norm_sqr() + ch.antenna(1)[l].norm_sqr();
            }
        }
        let v: Vec<f64> = acc.iter().map(|a| a / (2.0 * trials as f64)).collect();
        assert!((v[0] - 1.0).abs() < 0.03);
        for l in 1..3 {
            let want = (-(l as f64) / 5.0).exp();
            assert!(((v[l] / v[0]) / want - 1.0).abs() < 0.03, "tap {l}: {}", v[l] / v[0]);
        }
        let s: f64 = power_delay_profile(3, true).iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_channel() {
        let f = frame(StbcScheme::Alamouti, 4);
        let ch = ChannelRealization::from_taps(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(apply_channel(&f, &ch).unwrap(), f.antennas[0]);
    }

    #[test]
    fn superposition() {
        let f = frame(StbcScheme::SpatialMultiplexing, 4);
        let y = apply_channel(&f, &ChannelRealization::flat_unit()).unwrap();
        for k in 0..y.len() {
            assert!((y[k] - f.antennas[0][k] - f.antennas[1][k]).norm() < 1e-15);
        }
    }

    #[test]
    fn impulse_reproduces_taps() {
        let mut x0 = vec![c(0.0, 0.0); 8];
        x0[2] = c(1.0, 0.0);
        let x1 = vec![c(0.0, 0.0); 8];
        let h = vec![c(0.5, 0.1), c(-0.2, 0.3), c(9.0, 9.0), c(9.0, 9.0)];
        let ch = ChannelRealization::from_taps(h.clone()).unwrap();
        let y = apply_channel_to(&[x0, x1], &ch).unwrap();
        assert_eq!(y[2], h[0]);
        assert_eq!(y[3], h[1]);
        assert!(y.iter().enumerate().all(|(k, v)| k == 2 || k == 3 || v.norm() == 0.0));
    }

    #[test]
    fn channel_is_linear() {
        let f1 = frame(StbcScheme::Alamouti, 4);
        let f2 = frame(StbcScheme::SpatialMultiplexing, 2);
        let ch = draw_channel(&mut rng::from_seed(3), 3).unwrap();
        let (a, b) = (c(0.3, -1.2), c(2.0, 0.5));
        let mix: [Vec<Complex64>; 2] = [0, 1].map(|f| {
            f1.antennas[f]
                .iter()
                .zip(&f2.antennas[f])
                .map(|(x, z)| a * x + b * z)
                .collect()
        });
        let lhs = apply_channel_to(&mix, &ch).unwrap();
        let y1 = apply_channel(&f1, &ch).unwrap();
        let y2 = apply_channel(&f2, &ch).unwrap();
        for k in 0..lhs.len() {
            assert!((lhs[k] - (a * y1[k] + b * y2[k])).norm() < 1e-12);
        }
    }

    #[test]
    fn clean_receive_bit_matches_antenna_zero() {
        let f = frame(StbcScheme::Alamouti, 4);
        let ch = ChannelRealization::from_taps(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let rx = receive(&mut rng::from_seed(1), &f, &ch, &ImpairmentParams::noiseless(), None).unwrap();
        assert_eq!(rx.samples, f.antennas[0]);
        assert_eq!(rx.noise_var, 0.0);
    }

    #[test]
    fn impairment_validation() {
        let mut imp = ImpairmentParams::at_snr(10.0);
        assert!(imp.validate().is_ok());
        imp.timing_offset = 1.0;
        assert!(imp.validate().is_err());
        imp.timing_offset = 0.5;
        imp.freq_offset = f64::NAN;
        assert!(imp.validate().is_err());
    }

    #[test]
    fn time_varying_draw_records_initial_taps() {
        let m = ChannelModel::rayleigh(3);
        let ch = m.draw(&mut rng::from_seed(4), 1e-3, 512, 576).unwrap();
        assert_eq!(ch.taps, ch.fading.as_ref().unwrap().gains_at(0));
        assert!(m.draw(&mut rng::from_seed(4), 0.0, 512, 576).unwrap().fading.is_none());
    }
}
