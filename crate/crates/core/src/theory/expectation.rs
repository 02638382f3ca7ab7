//! Exact mean of the feature estimator for a static channel.
//!
//! With interleaved mapping and unitary transforms every transmitted sample
//! is a single data symbol, `x(c) = d_{c mod M} / sqrt(lambda)`, and the
//! conjugate blocks of the Alamouti code carry `conj(d_{-c mod M})`. A
//! received sample is therefore a short linear combination of symbols and
//! their conjugates, and
//!
//! ```text
//! E[y_a^2 y_b^2] = cum(y_a, y_a, y_b, y_b) + E[y_a^2] E[y_b^2] + 2 E[y_a y_b]^2
//! ```
//!
//! follows from the symbol cumulants `kappa42`, `kappa40` and the unit
//! symbol power. Averaged over block pairs of both parities this gives the
//! expected feature at every shift as a quartic polynomial in the channel
//! taps. The coefficients depend only on the waveform and are computed once.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::ChannelRealization;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::identifier::conj_time_reverse_index;
use crate::modem::{Mapping, ScFdmaParams, StbcScheme};

/// Largest tap count per antenna the coefficient table is built for.
pub const MAX_PATHS: usize = 8;

/// First block used for the stationary evaluation; even, and far enough from
/// the frame start that the channel memory never reaches before it.
const BASE_BLOCK: i64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Symbol {
    stream: i64,
    index: usize,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    /// `f * L_h + l`.
    tap: u8,
    symbol: Symbol,
    conj: bool,
    sign: f64,
}

/// Symbols reaching received sample `k` through each tap.
fn sample_terms(scheme: StbcScheme, p: &ScFdmaParams, paths: usize, k: i64, out: &mut Vec<Term>) {
    out.clear();
    let block = p.block_len() as i64;
    let m = p.m;
    for f in 0..2 {
        for l in 0..paths {
            let s = k - l as i64;
            let t = s.div_euclid(block);
            let pos = s.rem_euclid(block) as usize;
            let core = if pos < p.cp { pos + p.n - p.cp } else { pos - p.cp };
            let j = core % m;
            let tap = (f * paths + l) as u8;
            let term = match scheme {
                StbcScheme::SpatialMultiplexing => Term {
                    tap,
                    symbol: Symbol {
                        stream: 2 * t + f as i64,
                        index: j,
                    },
                    conj: false,
                    sign: 1.0,
                },
                StbcScheme::Alamouti => {
                    let pair = t.div_euclid(2);
                    if t.rem_euclid(2) == 0 {
                        Term {
                            tap,
                            symbol: Symbol {
                                stream: 2 * pair + f as i64,
                                index: j,
                            },
                            conj: false,
                            sign: 1.0,
                        }
                    } else {
                        // Antenna 0 sends -conj(d_1), antenna 1 sends conj(d_0).
                        let (v, sign) = if f == 0 { (1, -1.0) } else { (0, 1.0) };
                        Term {
                            tap,
                            symbol: Symbol {
                                stream: 2 * pair + v,
                                index: (m - j) % m,
                            },
                            conj: true,
                            sign,
                        }
                    }
                }
            };
            out.push(term);
        }
    }
}

/// Sorted 4-tuples of tap indices and a lookup from any ordered tuple.
#[derive(Debug, Clone)]
struct Monomials {
    taps: usize,
    list: Vec<[u8; 4]>,
    lookup: Vec<u32>,
}

impl Monomials {
    fn new(taps: usize) -> Self {
        let mut list = Vec::new();
        let mut lookup = vec![0u32; taps.pow(4)];
        for a in 0..taps {
            for b in a..taps {
                for c in b..taps {
                    for d in c..taps {
                        list.push([a as u8, b as u8, c as u8, d as u8]);
                    }
                }
            }
        }
        for (i, key) in list.iter().enumerate() {
            // Register every permutation of the sorted key.
            let k = key.map(usize::from);
            for p in PERMUTATIONS {
                let idx = ((k[p[0]] * taps + k[p[1]]) * taps + k[p[2]]) * taps + k[p[3]];
                lookup[idx] = i as u32;
            }
        }
        Monomials { taps, list, lookup }
    }

    fn id(&self, t: [u8; 4]) -> usize {
        let n = self.taps;
        let t = t.map(usize::from);
        self.lookup[((t[0] * n + t[1]) * n + t[2]) * n + t[3]] as usize
    }
}

const PERMUTATIONS: [[usize; 4]; 24] = [
    [0, 1, 2, 3],
    [0, 1, 3, 2],
    [0, 2, 1, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
    [0, 3, 2, 1],
    [1, 0, 2, 3],
    [1, 0, 3, 2],
    [1, 2, 0, 3],
    [1, 2, 3, 0],
    [1, 3, 0, 2],
    [1, 3, 2, 0],
    [2, 0, 1, 3],
    [2, 0, 3, 1],
    [2, 1, 0, 3],
    [2, 1, 3, 0],
    [2, 3, 0, 1],
    [2, 3, 1, 0],
    [3, 0, 1, 2],
    [3, 0, 2, 1],
    [3, 1, 0, 2],
    [3, 1, 2, 0],
    [3, 2, 0, 1],
    [3, 2, 1, 0],
];

/// Coefficients of one shift, split by the symbol statistic they multiply.
#[derive(Debug, Clone)]
struct ShiftCoefficients {
    kappa42: Vec<f64>,
    kappa40: Vec<f64>,
    kappa40_conj: Vec<f64>,
    second_order: Vec<f64>,
}

impl ShiftCoefficients {
    fn zeros(len: usize) -> Self {
        ShiftCoefficients {
            kappa42: vec![0.0; len],
            kappa40: vec![0.0; len],
            kappa40_conj: vec![0.0; len],
            second_order: vec![0.0; len],
        }
    }
}

/// Symbol statistics entering the expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolCumulants {
    pub kappa42: f64,
    pub kappa40: Complex64,
}

impl SymbolCumulants {
    pub fn of(c: Constellation) -> Self {
        SymbolCumulants {
            kappa42: c.cumulant_42(),
            kappa40: c.cumulant_40(),
        }
    }
}

/// Expected feature `E[A_hat(tau)]`, `tau = 0..N+cp`, as a function of the
/// channel taps.
#[derive(Debug, Clone)]
pub struct FeatureExpectation {
    scheme: StbcScheme,
    params: ScFdmaParams,
    paths: usize,
    monomials: Monomials,
    shifts: Vec<ShiftCoefficients>,
}

impl FeatureExpectation {
    pub fn new(scheme: StbcScheme, params: &ScFdmaParams, paths: usize) -> Result<Self> {
        params.validate()?;
        if params.mapping != Mapping::Interleaved || !params.n.is_multiple_of(params.m) {
            return Err(Error::UnsupportedAnalysis(
                "exact feature expectation needs interleaved mapping with an integer expansion factor".into(),
            ));
        }
        if paths == 0 || paths > MAX_PATHS {
            return Err(Error::config(format!("channel length {paths} outside 1..={MAX_PATHS}")));
        }
        let monomials = Monomials::new(2 * paths);
        let block = params.block_len();
        let shifts = (0..block)
            .into_par_iter()
            .map(|tau| shift_coefficients(scheme, params, paths, &monomials, tau))
            .collect();
        Ok(FeatureExpectation {
            scheme,
            params: *params,
            paths,
            monomials,
            shifts,
        })
    }

    pub fn scheme(&self) -> StbcScheme {
        self.scheme
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    /// Expected feature for channel `ch` and symbol statistics `k`.
    pub fn evaluate(&self, ch: &ChannelRealization, k: SymbolCumulants) -> Result<Vec<Complex64>> {
        if ch.paths != self.paths {
            return Err(Error::invalid(format!(
                "expectation built for {} paths, channel has {}",
                self.paths, ch.paths
            )));
        }
        let products: Vec<Complex64> = self
            .monomials
            .list
            .iter()
            .map(|t| t.iter().map(|&i| ch.taps[i as usize]).product())
            .collect();
        let scale = 1.0 / (self.params.expansion() * self.params.expansion());
        Ok(self
            .shifts
            .iter()
            .map(|s| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, h) in products.iter().enumerate() {
                    let c = k.kappa42 * s.kappa42[i]
                        + k.kappa40 * s.kappa40[i]
                        + k.kappa40.conj() * s.kappa40_conj[i]
                        + s.second_order[i];
                    acc += c * h;
                }
                acc * scale
            })
            .collect())
    }
}

type Bilinear = Vec<(u8, u8, f64)>;

fn shift_coefficients(scheme: StbcScheme, p: &ScFdmaParams, paths: usize, mono: &Monomials, tau: usize) -> ShiftCoefficients {
    let block = p.block_len();
    let mut out = ShiftCoefficients::zeros(mono.list.len());
    let (mut ta, mut tb) = (Vec::new(), Vec::new());
    let (mut eab, mut eaa, mut ebb): (Bilinear, Bilinear, Bilinear) = (Vec::new(), Vec::new(), Vec::new());
    for parity in 0..2 {
        let q = BASE_BLOCK + parity;
        for n in 0..block {
            let a = q * block as i64 + (tau + n) as i64;
            let b = (q + 1) * block as i64 + (tau + conj_time_reverse_index(n, p.n, p.cp)) as i64;
            sample_terms(scheme, p, paths, a, &mut ta);
            sample_terms(scheme, p, paths, b, &mut tb);

            for t1 in &ta {
                for t2 in ta.iter().filter(|t| t.symbol == t1.symbol) {
                    for t3 in tb.iter().filter(|t| t.symbol == t1.symbol) {
                        for t4 in tb.iter().filter(|t| t.symbol == t1.symbol) {
                            let id = mono.id([t1.tap, t2.tap, t3.tap, t4.tap]);
                            let s = 0.5 * t1.sign * t2.sign * t3.sign * t4.sign;
                            match [t1, t2, t3, t4].iter().filter(|t| t.conj).count() {
                                0 => out.kappa40[id] += s,
                                2 => out.kappa42[id] += s,
                                4 => out.kappa40_conj[id] += s,
                                _ => {}
                            }
                        }
                    }
                }
            }

            pair_moments(&ta, &tb, &mut eab);
            pair_moments(&ta, &ta, &mut eaa);
            pair_moments(&tb, &tb, &mut ebb);
            for &(i, j, u) in &eaa {
                for &(k, l, v) in &ebb {
                    out.second_order[mono.id([i, j, k, l])] += 0.5 * u * v;
                }
            }
            for &(i, j, u) in &eab {
                for &(k, l, v) in &eab {
                    out.second_order[mono.id([i, j, k, l])] += u * v;
                }
            }
        }
    }
    out
}

/// `E[x y]` between two term lists: one plain and one conjugated copy of
/// the same unit-power symbol.
fn pair_moments(x: &[Term], y: &[Term], out: &mut Bilinear) {
    out.clear();
    for s in x {
        for t in y.iter().filter(|t| t.symbol == s.symbol && t.conj != s.conj) {
            out.push((s.tap, t.tap, s.sign * t.sign));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::{synthesize_frame, synthesize_frame_from_symbols, SymbolBlock};
    use crate::rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sample_model_reproduces_the_frame() {
        for scheme in StbcScheme::BOTH {
            let p = ScFdmaParams::interleaved(16, 2, 3, Constellation::Psk8).unwrap();
            let mut r = rng::from_seed(12);
            let f = synthesize_frame(&mut r, scheme, &p, 8).unwrap();
            let mut terms = Vec::new();
            for k in 0..f.len() {
                sample_terms(scheme, &p, 1, k as i64, &mut terms);
                for (ant, t) in terms.iter().enumerate() {
                    let d = f.truth_symbols[t.symbol.stream as usize].0[t.symbol.index];
                    let d = if t.conj { d.conj() } else { d } * t.sign / 2f64.sqrt();
                    assert!((f.antennas[ant][k] - d).norm() < 1e-12, "{scheme} k={k}");
                }
            }
        }
    }

    #[test]
    fn flat_channel_reproduces_closed_form_peaks() {
        // Odd prefix: no repetition coincidences.
        let p = ScFdmaParams::interleaved(64, 2, 7, Constellation::Psk8).unwrap();
        let e = FeatureExpectation::new(StbcScheme::Alamouti, &p, 1).unwrap();
        let a = e
            .evaluate(&ChannelRealization::flat_unit(), SymbolCumulants::of(Constellation::Psk8))
            .unwrap();
        let mut want = vec![0.0; 71];
        for (tau, factor) in super::super::peak_anchors(64, 7) {
            want[tau] = -factor / 4.0;
        }
        for (tau, (got, w)) in a.iter().zip(&want).enumerate() {
            assert!((got - c(*w, 0.0)).norm() < 1e-12, "tau {tau}: {got}");
        }
    }

    #[test]
    fn spatial_multiplexing_mean_vanishes_without_kappa40() {
        let p = ScFdmaParams::interleaved(32, 2, 4, Constellation::Psk8).unwrap();
        let e = FeatureExpectation::new(StbcScheme::SpatialMultiplexing, &p, 2).unwrap();
        let ch = crate::channel::draw_channel(&mut rng::from_seed(2), 2).unwrap();
        let a = e.evaluate(&ch, SymbolCumulants::of(Constellation::Psk8)).unwrap();
        assert!(a.iter().all(|v| v.norm() < 1e-12));
        let q = e.evaluate(&ch, SymbolCumulants::of(Constellation::Qpsk)).unwrap();
        assert!(q.iter().any(|v| v.norm() > 0.1));
    }

    #[test]
    fn split_peaks_follow_half_delay_sum() {
        // h0 = delta(l), h1 = delta(m): the clusters sit at anchor + (l + m) / 2
        // for even l + m and vanish for odd l + m. Unequal delays shorten the
        // overlaps behind four of the six clusters.
        let p = ScFdmaParams::interleaved(32, 2, 5, Constellation::Psk8).unwrap();
        let e = FeatureExpectation::new(StbcScheme::Alamouti, &p, 3).unwrap();
        let k = SymbolCumulants::of(Constellation::Psk8);
        let anchors = [0, 8, 16, 21, 24, 29];
        let cases: [(usize, usize, Option<[f64; 6]>); 5] = [
            (0, 0, Some([37.0, 21.0, 6.0, 11.0, 6.0, 27.0])),
            (1, 1, Some([37.0, 21.0, 6.0, 11.0, 6.0, 27.0])),
            (0, 2, Some([32.5, 17.0, 6.0, 7.0, 6.0, 23.0])),
            (0, 1, None),
            (1, 2, None),
        ];
        for (l, m, factors) in cases {
            let mut taps = vec![c(0.0, 0.0); 6];
            taps[l] = c(1.0, 0.0);
            taps[3 + m] = c(1.0, 0.0);
            let a = e.evaluate(&ChannelRealization::from_taps(taps).unwrap(), k).unwrap();
            let mut want = vec![0.0; a.len()];
            if let Some(f) = factors {
                for (t, v) in anchors.iter().zip(f) {
                    want[t + (l + m) / 2] = -v / 4.0;
                }
            }
            for (tau, (got, w)) in a.iter().zip(&want).enumerate() {
                assert!((got - c(*w, 0.0)).norm() < 1e-12, "l={l} m={m} tau={tau}: {got}");
            }
        }
    }

    #[test]
    fn agrees_with_long_monte_carlo_average() {
        let p = ScFdmaParams::interleaved(16, 2, 2, Constellation::Qpsk).unwrap();
        let ch = ChannelRealization::from_taps(vec![c(1.0, 0.2), c(-0.4, 0.5), c(0.3, -0.8), c(0.6, 0.1)]).unwrap();
        let k = SymbolCumulants::of(Constellation::Qpsk);
        for scheme in StbcScheme::BOTH {
            let want = FeatureExpectation::new(scheme, &p, 2).unwrap().evaluate(&ch, k).unwrap();
            let mut r = rng::from_seed(40);
            let runs = 20;
            let mut mean = vec![c(0.0, 0.0); p.block_len()];
            for _ in 0..runs {
                let f = synthesize_frame(&mut r, scheme, &p, 6000).unwrap();
                let y = crate::channel::apply_channel(&f, &ch).unwrap();
                let fv = crate::identifier::estimate_feature(&y, &p).unwrap();
                mean.iter_mut().zip(&fv.a_r).for_each(|(m, v)| *m += v / runs as f64);
            }
            // Five standard errors of the averaged estimate.
            let sigma = (p.block_len() as f64 / 6000.0 * ch.energy().powi(4) / 16.0 / runs as f64).sqrt();
            for (tau, (got, w)) in mean.iter().zip(&want).enumerate() {
                assert!((got - w).norm() < 5.0 * sigma, "{scheme} tau {tau}: {got} vs {w}");
            }
        }
    }

    #[test]
    fn rejects_unsupported_waveforms() {
        let p = ScFdmaParams::localized(64, 24, 0, 8, Constellation::Qpsk).unwrap();
        assert!(matches!(
            FeatureExpectation::new(StbcScheme::Alamouti, &p, 1),
            Err(Error::UnsupportedAnalysis(_))
        ));
        let p = ScFdmaParams::interleaved(64, 2, 8, Constellation::Qpsk).unwrap();
        assert!(FeatureExpectation::new(StbcScheme::Alamouti, &p, 0).is_err());
        let e = FeatureExpectation::new(StbcScheme::Alamouti, &p, 1).unwrap();
        let ch = ChannelRealization::from_taps(vec![c(1.0, 0.0); 4]).unwrap();
        assert!(e.evaluate(&ch, SymbolCumulants::of(Constellation::Qpsk)).is_err());
    }

    #[test]
    fn explicit_symbols_give_the_same_model() {
        // Unit symbols on one stream only: the sample model must pick them up
        // with the code's signs.
        let p = ScFdmaParams::interleaved(8, 2, 2, Constellation::Qpsk).unwrap();
        let one = SymbolBlock(vec![c(1.0, 0.0); 4]);
        let zero = SymbolBlock(vec![c(0.0, 0.0); 4]);
        let f = synthesize_frame_from_symbols(StbcScheme::Alamouti, &p, vec![zero, one]).unwrap();
        let b = p.block_len();
        assert!(f.antennas[0][b..].iter().all(|v| (v + c(0.5f64.sqrt(), 0.0)).norm() < 1e-12));
        assert!(f.antennas[1][..b].iter().all(|v| (v - c(0.5f64.sqrt(), 0.0)).norm() < 1e-12));
    }
}
