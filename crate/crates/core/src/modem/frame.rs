use num_complex::Complex64;
use rand::Rng;

use super::transform::{map_into, Transformer};
use super::{draw_symbol_block, stbc_encode, ScFdmaParams, StbcScheme, SymbolBlock};
use crate::error::{Error, Result};

/// Per-antenna transmit sequences plus the ground truth that produced them.
#[derive(Debug, Clone)]
pub struct TxFrame {
    /// `antennas[f]` holds `n_blocks * (N + cp)` samples.
    pub antennas: [Vec<Complex64>; 2],
    pub scheme: StbcScheme,
    /// Data blocks in consumption order (`d_0, d_1, ...`).
    pub truth_symbols: Vec<SymbolBlock>,
    pub params: ScFdmaParams,
    pub n_blocks: usize,
    /// Seed of the stream the frame was drawn from, when known.
    pub seed: Option<u64>,
}

impl TxFrame {
    pub fn len(&self) -> usize {
        self.antennas[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.antennas[0].is_empty()
    }

    /// Block `i` of antenna `f`, cyclic prefix included.
    pub fn block(&self, antenna: usize, i: usize) -> &[Complex64] {
        let b = self.params.block_len();
        &self.antennas[antenna][i * b..(i + 1) * b]
    }
}

/// Number of data blocks consumed by `n_blocks` transmitted blocks.
fn data_blocks(scheme: StbcScheme, n_blocks: usize) -> usize {
    match scheme {
        StbcScheme::Alamouti => n_blocks,
        StbcScheme::SpatialMultiplexing => 2 * n_blocks,
    }
}

fn check_blocks(scheme: StbcScheme, n_blocks: usize) -> Result<()> {
    if n_blocks == 0 {
        return Err(Error::config("frame needs at least one block"));
    }
    if scheme == StbcScheme::Alamouti && !n_blocks.is_multiple_of(2) {
        return Err(Error::config(format!(
            "Alamouti frames need an even number of blocks, got {n_blocks}"
        )));
    }
    Ok(())
}

/// Draws random data and builds an `n_blocks`-block frame.
pub fn synthesize_frame<R: Rng + ?Sized>(
    rng: &mut R,
    scheme: StbcScheme,
    params: &ScFdmaParams,
    n_blocks: usize,
) -> Result<TxFrame> {
    params.validate()?;
    check_blocks(scheme, n_blocks)?;
    let symbols = (0..data_blocks(scheme, n_blocks))
        .map(|_| draw_symbol_block(rng, params.constellation, params.m))
        .collect::<Result<Vec<_>>>()?;
    synthesize_frame_from_symbols(scheme, params, symbols)
}

/// Builds a frame from caller-supplied data blocks. Alamouti consumes one
/// data block per transmitted block, spatial multiplexing two.
pub fn synthesize_frame_from_symbols(scheme: StbcScheme, params: &ScFdmaParams, symbols: Vec<SymbolBlock>) -> Result<TxFrame> {
    params.validate()?;
    if !symbols.len().is_multiple_of(2) {
        return Err(Error::config("data blocks must come in (even, odd) pairs"));
    }
    let n_blocks = match scheme {
        StbcScheme::Alamouti => symbols.len(),
        StbcScheme::SpatialMultiplexing => symbols.len() / 2,
    };
    check_blocks(scheme, n_blocks)?;

    let tf = Transformer::for_params(params);
    let mut antennas = [
        Vec::with_capacity(n_blocks * params.block_len()),
        Vec::with_capacity(n_blocks * params.block_len()),
    ];
    let mut mapped = vec![Complex64::new(0.0, 0.0); params.n];
    for pair in symbols.chunks_exact(2) {
        let even = tf.dft(&pair[0])?;
        let odd = tf.dft(&pair[1])?;
        for slot in stbc_encode(scheme, &even, &odd)?.slots {
            for (f, block) in slot.iter().enumerate() {
                map_into(&block.0, params, &mut mapped)?;
                antennas[f].extend(tf.idft_cp(&mapped, params.cp)?);
            }
        }
    }
    Ok(TxFrame {
        antennas,
        scheme,
        truth_symbols: symbols,
        params: *params,
        n_blocks,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Constellation;
    use crate::identifier::conj_time_reverse_index;
    use crate::rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_blocks(seed: u64, count: usize, m: usize) -> Vec<SymbolBlock> {
        let mut r = rng::from_seed(seed);
        (0..count)
            .map(|_| {
                SymbolBlock(
                    (0..m)
                        .map(|_| {
                            let re: f64 = StandardNormal.sample(&mut r);
                            let im: f64 = StandardNormal.sample(&mut r);
                            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                        })
                        .collect(),
                )
            })
            .collect()
    }

    #[test]
    fn frame_lengths() {
        let p = ScFdmaParams::interleaved(512, 2, 64, Constellation::Qpsk).unwrap();
        let f = synthesize_frame(&mut rng::from_seed(3), StbcScheme::SpatialMultiplexing, &p, 10).unwrap();
        assert_eq!(f.antennas[0].len(), 5760);
        assert_eq!(f.antennas[1].len(), 5760);
        assert_eq!(f.truth_symbols.len(), 20);
        let f = synthesize_frame(&mut rng::from_seed(3), StbcScheme::Alamouti, &p, 10).unwrap();
        assert_eq!(f.len(), 5760);
        assert_eq!(f.truth_symbols.len(), 10);
    }

    #[test]
    fn odd_alamouti_block_count_rejected() {
        let p = ScFdmaParams::interleaved(64, 2, 8, Constellation::Qpsk).unwrap();
        let e = synthesize_frame(&mut rng::from_seed(3), StbcScheme::Alamouti, &p, 3).unwrap_err();
        assert!(e.is_config());
        assert!(synthesize_frame(&mut rng::from_seed(3), StbcScheme::SpatialMultiplexing, &p, 3).is_ok());
    }

    #[test]
    fn replay_is_bit_exact() {
        let p = ScFdmaParams::interleaved(64, 2, 8, Constellation::Qam16).unwrap();
        let a = synthesize_frame(&mut rng::from_seed(11), StbcScheme::Alamouti, &p, 4).unwrap();
        let b = synthesize_frame(&mut rng::from_seed(11), StbcScheme::Alamouti, &p, 4).unwrap();
        assert_eq!(a.antennas, b.antennas);
    }

    #[test]
    fn useful_part_repeats_scaled_symbols() {
        // Interleaved mapping with integer lambda: the useful part of block 2b on
        // antenna 0 is d_2b repeated lambda times, antenna 1 in slot 2b+1 carries
        // the conjugate of d_2b in reversed order.
        for (n, lambda, cp) in [(64, 2, 8), (96, 3, 7), (128, 4, 16)] {
            let p = ScFdmaParams::interleaved(n, lambda, cp, Constellation::Qpsk).unwrap();
            let f = synthesize_frame(&mut rng::from_seed(n as u64), StbcScheme::Alamouti, &p, 4).unwrap();
            let m = p.m;
            let s = (lambda as f64).sqrt().recip();
            for b in 0..2 {
                let d = &f.truth_symbols[2 * b].0;
                let c0 = &f.block(0, 2 * b)[cp..];
                let c1 = &f.block(1, 2 * b + 1)[cp..];
                for a in 0..lambda {
                    for k in 0..m {
                        assert!((c0[k + a * m] - d[k] * s).norm() < 1e-12);
                        assert!((c1[k + a * m] - d[(m - k) % m].conj() * s).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn alamouti_blocks_are_conjugate_reversals() {
        let p = ScFdmaParams::interleaved(64, 2, 8, Constellation::Psk8).unwrap();
        let f = synthesize_frame(&mut rng::from_seed(5), StbcScheme::Alamouti, &p, 6).unwrap();
        for b in 0..3 {
            let s0 = f.block(0, 2 * b);
            let s1 = f.block(1, 2 * b + 1);
            for k in 0..p.block_len() {
                let j = conj_time_reverse_index(k, p.n, p.cp);
                assert!((s0[k] - s1[j].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn useful_power_is_one_over_lambda() {
        let p = ScFdmaParams::interleaved(128, 2, 16, Constellation::Qpsk).unwrap();
        let f = synthesize_frame(&mut rng::from_seed(9), StbcScheme::SpatialMultiplexing, &p, 200).unwrap();
        for ant in 0..2 {
            let (mut e, mut cnt) = (0.0, 0usize);
            for i in 0..f.n_blocks {
                e += f.block(ant, i)[p.cp..].iter().map(|z| z.norm_sqr()).sum::<f64>();
                cnt += p.n;
            }
            // QPSK: every useful sample has power exactly 1/lambda.
            assert!((e / cnt as f64 - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn localized_frames_have_unit_over_lambda_power() {
        let p = ScFdmaParams::localized(512, 312, 0, 64, Constellation::Qpsk).unwrap();
        let f = synthesize_frame(&mut rng::from_seed(9), StbcScheme::Alamouti, &p, 40).unwrap();
        let e: f64 = f.antennas[0].iter().map(|z| z.norm_sqr()).sum::<f64>() / f.len() as f64;
        assert!((e - 312.0 / 512.0).abs() < 0.03, "{e}");
    }

    #[test]
    fn gaussian_symbols_accepted() {
        let p = ScFdmaParams::interleaved(32, 2, 3, Constellation::Qpsk).unwrap();
        let f = synthesize_frame_from_symbols(StbcScheme::Alamouti, &p, gaussian_blocks(1, 4, 16)).unwrap();
        assert_eq!(f.n_blocks, 4);
        assert!(synthesize_frame_from_symbols(StbcScheme::Alamouti, &p, gaussian_blocks(1, 3, 16)).is_err());
    }
}
