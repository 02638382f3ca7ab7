//! Sum-of-sinusoids Rayleigh tap processes.
//!
//! Each tap is `g(k) = sqrt(var / S) * sum_s A_s exp(j w_s k)` with complex
//! Gaussian weights `A_s ~ CN(0, 1)` and Doppler shifts
//! `w_s = 2 pi f_d cos(2 pi (s + theta) / S)`, `theta ~ U(0, 1)` drawn per tap.
//! The weights make every marginal exactly complex Gaussian while the
//! shifts follow the Jakes spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::complex_gaussian;
use crate::error::{Error, Result};

pub const DEFAULT_OSCILLATORS: usize = 16;

/// How often the tap gains are refreshed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DopplerUpdate {
    #[default]
    PerSample,
    /// Gains held at their value at the start of each block.
    PerBlock,
}

#[derive(Debug, Clone, PartialEq)]
struct TapProcess {
    weights: Vec<Complex64>,
    omegas: Vec<f64>,
}

impl TapProcess {
    fn gain(&self, k: usize) -> Complex64 {
        self.weights
            .iter()
            .zip(&self.omegas)
            .map(|(a, &w)| a * Complex64::from_polar(1.0, w * k as f64))
            .sum()
    }
}

/// Time-varying gains for the `2 * L_h` taps of a channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingProcess {
    taps: Vec<TapProcess>,
    /// Doppler frequency in cycles per sample.
    pub doppler: f64,
    pub update: DopplerUpdate,
    pub block_len: usize,
}

const RESYNC: usize = 4096;

impl FadingProcess {
    /// `doppler` is in cycles per sample.
    pub fn draw<R: Rng + ?Sized>(
        rng: &mut R,
        pdp: &[f64],
        doppler: f64,
        oscillators: usize,
        update: DopplerUpdate,
        block_len: usize,
    ) -> Self {
        let taps = (0..2)
            .flat_map(|_| pdp.iter())
            .map(|&var| {
                let theta: f64 = rng.random();
                let amp = (var / oscillators as f64).sqrt();
                let omegas = (0..oscillators)
                    .map(|s| 2.0 * PI * doppler * (2.0 * PI * (s as f64 + theta) / oscillators as f64).cos())
                    .collect();
                let weights = (0..oscillators).map(|_| complex_gaussian(rng, 1.0) * amp).collect();
                TapProcess { weights, omegas }
            })
            .collect();
        FadingProcess {
            taps,
            doppler,
            update,
            block_len: block_len.max(1),
        }
    }

    /// Gains `[h0(0..L), h1(0..L)]` at sample `k`.
    pub fn gains_at(&self, k: usize) -> Vec<Complex64> {
        self.taps.iter().map(|t| t.gain(k)).collect()
    }

    pub(super) fn apply(&self, antennas: &[Vec<Complex64>; 2], paths: usize) -> Result<Vec<Complex64>> {
        if self.taps.len() != 2 * paths {
            return Err(Error::invalid("fading process does not match the tap count"));
        }
        let len = antennas[0].len();
        let mut y = vec![Complex64::new(0.0, 0.0); len];
        let mut gains = self.gains_at(0);
        // Phasor state per tap and oscillator for the per-sample recursion.
        let mut phasors: Vec<Vec<Complex64>> = self
            .taps
            .iter()
            .map(|t| vec![Complex64::new(1.0, 0.0); t.omegas.len()])
            .collect();
        let steps: Vec<Vec<Complex64>> = self
            .taps
            .iter()
            .map(|t| t.omegas.iter().map(|&w| Complex64::from_polar(1.0, w)).collect())
            .collect();

        for k in 0..len {
            match self.update {
                DopplerUpdate::PerSample => {
                    if k > 0 {
                        let resync = k % RESYNC == 0;
                        for (i, tap) in self.taps.iter().enumerate() {
                            let mut g = Complex64::new(0.0, 0.0);
                            for s in 0..tap.omegas.len() {
                                phasors[i][s] = if resync {
                                    Complex64::from_polar(1.0, tap.omegas[s] * k as f64)
                                } else {
                                    phasors[i][s] * steps[i][s]
                                };
                                g += tap.weights[s] * phasors[i][s];
                            }
                            gains[i] = g;
                        }
                    }
                }
                DopplerUpdate::PerBlock => {
                    if k % self.block_len == 0 && k > 0 {
                        gains = self.gains_at(k);
                    }
                }
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for f in 0..2 {
                let x = &antennas[f];
                for l in 0..paths.min(k + 1) {
                    acc += gains[f * paths + l] * x[k - l];
                }
            }
            y[k] = acc;
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn marginal_power_matches_profile() {
        let mut r = rng::from_seed(8);
        let pdp = [0.6, 0.4];
        let mut acc = [0.0; 2];
        let n = 20_000;
        for _ in 0..n {
            let fp = FadingProcess::draw(&mut r, &pdp, 1e-4, 16, DopplerUpdate::PerSample, 100);
            let g = fp.gains_at(1000);
            acc[0] += g[0].norm_sqr();
            acc[1] += g[1].norm_sqr();
        }
        assert!((acc[0] / n as f64 - 0.6).abs() < 0.03);
        assert!((acc[1] / n as f64 - 0.4).abs() < 0.03);
    }

    #[test]
    fn recursion_tracks_exact_gains() {
        let mut r = rng::from_seed(9);
        let fp = FadingProcess::draw(&mut r, &[1.0], 2e-3, 16, DopplerUpdate::PerSample, 10);
        let len = 10_000;
        let mut x0 = vec![Complex64::new(0.0, 0.0); len];
        x0.iter_mut().for_each(|v| *v = Complex64::new(1.0, 0.0));
        let x1 = vec![Complex64::new(0.0, 0.0); len];
        let y = fp.apply(&[x0, x1], 1).unwrap();
        for k in [0, 1, 17, 4095, 4096, 9999] {
            assert!((y[k] - fp.gains_at(k)[0]).norm() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn per_block_holds_gains() {
        let mut r = rng::from_seed(10);
        let fp = FadingProcess::draw(&mut r, &[1.0], 1e-2, 16, DopplerUpdate::PerBlock, 50);
        let ones = vec![Complex64::new(1.0, 0.0); 200];
        let zeros = vec![Complex64::new(0.0, 0.0); 200];
        let y = fp.apply(&[zeros, ones], 1).unwrap();
        assert_eq!(y[0], y[49]);
        assert_ne!(y[49], y[50]);
        assert!((y[50] - fp.gains_at(50)[1]).norm() < 1e-12);
    }
}
