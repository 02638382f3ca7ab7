//! Fixtures shared by the benchmarks.

use scfdma_stbc::channel::{draw_channel, receive};
use scfdma_stbc::modem::synthesize_frame;
use scfdma_stbc::{rng, Complex64, Constellation, ImpairmentParams, ScFdmaParams, StbcScheme};

/// Interleaved QPSK waveform with a prefix of `n / 8`.
pub fn waveform(n: usize) -> ScFdmaParams {
    ScFdmaParams::interleaved(n, 2, n / 8, Constellation::Qpsk).expect("valid waveform")
}

/// Received Alamouti samples over a three-path channel at 5 dB.
pub fn received(params: &ScFdmaParams, n_blocks: usize, seed: u64) -> Vec<Complex64> {
    let mut r = rng::from_seed(seed);
    let frame = synthesize_frame(&mut r, StbcScheme::Alamouti, params, n_blocks).expect("frame");
    let ch = draw_channel(&mut r, 3).expect("channel");
    receive(&mut r, &frame, &ch, &ImpairmentParams::at_snr(5.0), None)
        .expect("receive")
        .samples
}
