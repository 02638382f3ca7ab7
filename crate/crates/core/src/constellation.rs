//! Unit-average-power constellations.
//!
//! Point sets (index = Gray label):
//!
//! * QPSK: `((1 - 2 b1) + j (1 - 2 b0)) / sqrt(2)` for label `b1 b0`.
//! * 8-PSK: `exp(j 2 pi k / 8)` where `k` is the Gray decode of the label.
//! * 16-QAM: Gray-coded 4-PAM `{-3, -1, 1, 3}` per axis, scaled by `1/sqrt(10)`.
//! * 64-QAM: Gray-coded 8-PAM `{-7, ..., 7}` per axis, scaled by `1/sqrt(42)`.
//!
//! The upper half of a QAM label selects the in-phase level, the lower half
//! the quadrature level.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    Qpsk,
    Psk8,
    Qam16,
    Qam64,
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Amplitude of Gray label `label` in a `levels`-ary PAM alphabet
/// `{-(levels-1), ..., levels-1}` (unnormalised).
fn gray_pam(label: usize, levels: usize) -> f64 {
    let k = gray_decode(label);
    (2 * k) as f64 - (levels - 1) as f64
}

impl Constellation {
    pub const ALL: [Constellation; 4] = [
        Constellation::Qpsk,
        Constellation::Psk8,
        Constellation::Qam16,
        Constellation::Qam64,
    ];

    /// Number of points.
    pub fn order(self) -> usize {
        match self {
            Constellation::Qpsk => 4,
            Constellation::Psk8 => 8,
            Constellation::Qam16 => 16,
            Constellation::Qam64 => 64,
        }
    }

    pub fn is_psk(self) -> bool {
        matches!(self, Constellation::Qpsk | Constellation::Psk8)
    }

    /// Point for a Gray label in `0..order()`.
    pub fn point(self, label: usize) -> Complex64 {
        assert!(label < self.order(), "label {label} out of range");
        match self {
            Constellation::Qpsk => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let re = if label & 0b10 == 0 { s } else { -s };
                let im = if label & 0b01 == 0 { s } else { -s };
                Complex64::new(re, im)
            }
            Constellation::Psk8 => Complex64::from_polar(1.0, 2.0 * PI * gray_decode(label) as f64 / 8.0),
            Constellation::Qam16 => {
                let scale = 10f64.sqrt().recip();
                Complex64::new(gray_pam(label >> 2, 4), gray_pam(label & 0b11, 4)) * scale
            }
            Constellation::Qam64 => {
                let scale = 42f64.sqrt().recip();
                Complex64::new(gray_pam(label >> 3, 8), gray_pam(label & 0b111, 8)) * scale
            }
        }
    }

    pub fn points(self) -> Vec<Complex64> {
        (0..self.order()).map(|l| self.point(l)).collect()
    }

    /// Draws one point uniformly.
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> Complex64 {
        self.point(rng.random_range(0..self.order()))
    }

    /// Tabulated fourth-order two-conjugate cumulant of the unit-power
    /// alphabet.
    pub fn cumulant_42(self) -> f64 {
        match self {
            Constellation::Qpsk | Constellation::Psk8 => -1.0,
            Constellation::Qam16 => -0.68,
            Constellation::Qam64 => -0.619,
        }
    }

    /// Non-conjugate fourth-order cumulant `E d^4 - 3 (E d^2)^2`, exact over
    /// the alphabet. Zero for 8-PSK, non-zero for QPSK and square QAM.
    pub fn cumulant_40(self) -> Complex64 {
        let pts = self.points();
        let n = pts.len() as f64;
        let m2 = pts.iter().map(|d| d * d).sum::<Complex64>() / n;
        let m4 = pts.iter().map(|d| d.powi(4)).sum::<Complex64>() / n;
        m4 - 3.0 * m2 * m2
    }
}

/// Sample estimate `E|d|^4 - 2 (E|d|^2)^2 - |E d^2|^2` (zero-mean symbols).
pub fn sample_cumulant_42(symbols: &[Complex64]) -> f64 {
    let n = symbols.len() as f64;
    let m2 = symbols.iter().map(|d| d.norm_sqr()).sum::<f64>() / n;
    let m4 = symbols.iter().map(|d| d.norm_sqr().powi(2)).sum::<f64>() / n;
    let c20 = symbols.iter().map(|d| d * d).sum::<Complex64>() / n;
    m4 - 2.0 * m2 * m2 - c20.norm_sqr()
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constellation::Qpsk => "qpsk",
            Constellation::Psk8 => "psk8",
            Constellation::Qam16 => "qam16",
            Constellation::Qam64 => "qam64",
        })
    }
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Constellation::Qpsk),
            "psk8" | "8psk" | "8-psk" => Ok(Constellation::Psk8),
            "qam16" | "16qam" | "16-qam" => Ok(Constellation::Qam16),
            "qam64" | "64qam" | "64-qam" => Ok(Constellation::Qam64),
            "bpsk" => Err(Error::config(
                "BPSK is not supported (constellation order must be at least 4)",
            )),
            other => Err(Error::config(format!("unknown constellation '{other}'"))),
        }
    }
}
