use std::f64::consts::PI;

use num_complex::Complex64;

use super::ImpairmentParams;
use crate::error::{Error, Result};
use crate::modem::ScFdmaParams;

/// Length of the windowed-sinc interpolator.
pub const FRACTIONAL_DELAY_TAPS: usize = 64;
const KAISER_BETA: f64 = 16.0;

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-12 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

fn kernel(mu: f64) -> (isize, Vec<f64>) {
    let half = (FRACTIONAL_DELAY_TAPS / 2) as isize;
    let first = -(half - 1);
    let width = half as f64 + 1.0;
    let norm = bessel_i0(KAISER_BETA);
    let taps = (0..FRACTIONAL_DELAY_TAPS as isize)
        .map(|i| {
            let t = (first + i) as f64 - mu;
            let r = t / width;
            let w = bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / norm;
            w * sinc(t)
        })
        .collect();
    (first, taps)
}

/// Delays `seq` by `mu` samples (`|mu| < 1`) with a Kaiser-windowed sinc
/// interpolator; samples outside the sequence are taken as zero.
pub fn fractional_delay(seq: &[Complex64], mu: f64) -> Result<Vec<Complex64>> {
    if !mu.is_finite() || mu.abs() >= 1.0 {
        return Err(Error::invalid(format!("fractional delay {mu} outside (-1, 1)")));
    }
    if mu == 0.0 {
        return Ok(seq.to_vec());
    }
    let (first, taps) = kernel(mu);
    let len = seq.len() as isize;
    let out = (0..len)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &h) in taps.iter().enumerate() {
                let src = k - (first + i as isize);
                if (0..len).contains(&src) {
                    acc += seq[src as usize] * h;
                }
            }
            acc
        })
        .collect();
    Ok(out)
}

/// Rotates sample `k` by `exp(j 2 pi df k / N)`.
pub fn frequency_offset(mut seq: Vec<Complex64>, df: f64, n: usize) -> Vec<Complex64> {
    if df == 0.0 {
        return seq;
    }
    let w = 2.0 * PI * df / n as f64;
    for (k, v) in seq.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, w * k as f64);
    }
    seq
}

/// Fractional timing offset followed by the carrier offset. Doppler is part
/// of the channel realization and is applied by
/// [`apply_channel`](super::apply_channel).
pub fn apply_impairments(seq: Vec<Complex64>, imp: &ImpairmentParams, params: &ScFdmaParams) -> Result<Vec<Complex64>> {
    imp.validate()?;
    let seq = if imp.timing_offset != 0.0 {
        fractional_delay(&seq, imp.timing_offset)?
    } else {
        seq
    };
    Ok(frequency_offset(seq, imp.freq_offset, params.n))
}
