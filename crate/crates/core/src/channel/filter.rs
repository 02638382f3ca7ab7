use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Digital Butterworth low-pass (bilinear transform), applied to I and Q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Butterworth {
    pub order: usize,
    /// -3 dB frequency as a fraction of the Nyquist frequency.
    pub cutoff: f64,
}

/// `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy)]
struct Section {
    b: [f64; 3],
    a: [f64; 2],
}

impl Butterworth {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.order > 16 {
            return Err(Error::config(format!("Butterworth order {} outside 1..=16", self.order)));
        }
        if !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return Err(Error::config(format!("Butterworth cutoff {} outside (0, 1)", self.cutoff)));
        }
        Ok(())
    }

    fn sections(&self) -> Vec<Section> {
        let n = self.order;
        let wc = 2.0 * (PI * self.cutoff / 2.0).tan();
        let bilinear = |p: Complex64| (Complex64::new(2.0, 0.0) + p) / (Complex64::new(2.0, 0.0) - p);
        let mut out = Vec::new();
        for k in 0..n / 2 {
            let theta = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
            let z = bilinear(Complex64::from_polar(wc, theta));
            let a = [-2.0 * z.re, z.norm_sqr()];
            // Unit gain at DC: H(1) = g * 4 / (1 + a1 + a2).
            let g = (1.0 + a[0] + a[1]) / 4.0;
            out.push(Section { b: [g, 2.0 * g, g], a });
        }
        if n % 2 == 1 {
            let z = bilinear(Complex64::new(-wc, 0.0)).re;
            let a = [-z, 0.0];
            let g = (1.0 - z) / 2.0;
            out.push(Section { b: [g, g, 0.0], a });
        }
        out
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = x.to_vec();
        for s in self.sections() {
            let (mut z1, mut z2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for v in y.iter_mut() {
                let input = *v;
                let out = input * s.b[0] + z1;
                z1 = input * s.b[1] - out * s.a[0] + z2;
                z2 = input * s.b[2] - out * s.a[1];
                *v = out;
            }
        }
        y
    }

    /// Magnitude response at `f` cycles/sample.
    pub fn response(&self, f: f64) -> f64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * f);
        let z2 = z1 * z1;
        self.sections()
            .iter()
            .map(|s| ((z2 * s.b[2] + z1 * s.b[1] + s.b[0]) / (z2 * s.a[1] + z1 * s.a[0] + 1.0)).norm())
            .product()
    }
}
