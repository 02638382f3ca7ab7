use num_complex::Complex64;
use rand::Rng;

use super::{complex_gaussian, Butterworth, ImpairmentParams, RxSequence};
use crate::error::{Error, Result};

fn mean_power(seq: &[Complex64]) -> f64 {
    seq.iter().map(|v| v.norm_sqr()).sum::<f64>() / seq.len().max(1) as f64
}

fn signal_power(seq: &[Complex64]) -> Result<f64> {
    let p = mean_power(seq);
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::invalid("received signal has zero or non-finite power"));
    }
    Ok(p)
}

/// Adds circular complex white Gaussian noise of variance
/// `P_sig / 10^(snr/10)`, `P_sig` being the mean power of `seq`.
pub fn add_noise<R: Rng + ?Sized>(rng: &mut R, mut seq: Vec<Complex64>, snr_db: f64) -> Result<RxSequence> {
    let p = signal_power(&seq)?;
    let noise_var = if snr_db == f64::INFINITY {
        0.0
    } else {
        p / 10f64.powf(snr_db / 10.0)
    };
    if noise_var > 0.0 {
        seq.iter_mut().for_each(|v| *v += complex_gaussian(rng, noise_var));
    }
    Ok(RxSequence {
        samples: seq,
        noise_var,
        channel: None,
        impairments: ImpairmentParams::at_snr(snr_db),
    })
}

/// Noise added before a receive low-pass, scaled so that the SNR holds at
/// the filter output. `noise_var` is the in-band noise power.
pub(crate) fn add_filtered_noise<R: Rng + ?Sized>(
    rng: &mut R,
    seq: Vec<Complex64>,
    snr_db: f64,
    filter: &Butterworth,
) -> Result<RxSequence> {
    signal_power(&seq)?;
    let mut out = filter.apply(&seq);
    let ps = signal_power(&out)?;
    let mut noise_var = 0.0;
    if snr_db != f64::INFINITY {
        let raw: Vec<Complex64> = (0..seq.len()).map(|_| complex_gaussian(rng, 1.0)).collect();
        let shaped = filter.apply(&raw);
        let pw = mean_power(&shaped);
        let gain = (ps / (10f64.powf(snr_db / 10.0) * pw)).sqrt();
        out.iter_mut().zip(&shaped).for_each(|(o, w)| *o += w * gain);
        noise_var = gain * gain * pw;
    }
    Ok(RxSequence {
        samples: out,
        noise_var,
        channel: None,
        impairments: ImpairmentParams::at_snr(snr_db),
    })
}
