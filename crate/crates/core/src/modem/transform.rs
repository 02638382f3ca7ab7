use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{FreqBlock, Mapping, ScFdmaParams, SymbolBlock};
use crate::error::{Error, Result};

/// Planned unitary transforms for one waveform geometry.
pub struct Transformer {
    m: usize,
    n: usize,
    dft_m: Arc<dyn Fft<f64>>,
    idft_m: Arc<dyn Fft<f64>>,
    idft_n: Arc<dyn Fft<f64>>,
}

impl Transformer {
    pub fn new(m: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transformer {
            m,
            n,
            dft_m: planner.plan_fft_forward(m),
            idft_m: planner.plan_fft_inverse(m),
            idft_n: planner.plan_fft_inverse(n),
        }
    }

    pub fn for_params(params: &ScFdmaParams) -> Self {
        Self::new(params.m, params.n)
    }

    pub fn dft(&self, block: &SymbolBlock) -> Result<FreqBlock> {
        if block.len() != self.m {
            return Err(Error::invalid(format!("expected {} symbols, got {}", self.m, block.len())));
        }
        let mut buf = block.0.clone();
        self.dft_m.process(&mut buf);
        scale(&mut buf, self.m);
        Ok(FreqBlock(buf))
    }

    pub fn idft(&self, block: &FreqBlock) -> Result<SymbolBlock> {
        if block.len() != self.m {
            return Err(Error::invalid(format!("expected {} symbols, got {}", self.m, block.len())));
        }
        let mut buf = block.0.clone();
        self.idft_m.process(&mut buf);
        scale(&mut buf, self.m);
        Ok(SymbolBlock(buf))
    }

    /// Unitary N-point inverse transform followed by the cyclic prefix.
    pub fn idft_cp(&self, mapped: &[Complex64], cp: usize) -> Result<Vec<Complex64>> {
        if mapped.len() != self.n {
            return Err(Error::invalid(format!(
                "expected {} subcarriers, got {}",
                self.n,
                mapped.len()
            )));
        }
        if cp >= self.n {
            return Err(Error::config(format!(
                "cyclic prefix {cp} must be shorter than N = {}",
                self.n
            )));
        }
        let mut useful = mapped.to_vec();
        self.idft_n.process(&mut useful);
        scale(&mut useful, self.n);
        let mut out = Vec::with_capacity(self.n + cp);
        out.extend_from_slice(&useful[self.n - cp..]);
        out.extend_from_slice(&useful);
        Ok(out)
    }
}

fn scale(buf: &mut [Complex64], len: usize) {
    let s = (len as f64).sqrt().recip();
    buf.iter_mut().for_each(|z| *z *= s);
}

/// Unitary forward DFT (scale `1/sqrt(M)`).
pub fn dft_block(block: &SymbolBlock) -> Result<FreqBlock> {
    if block.is_empty() {
        return Err(Error::invalid("empty block"));
    }
    Transformer::new(block.len(), 1).dft(block)
}

/// Inverse of [`dft_block`].
pub fn idft_block(block: &FreqBlock) -> Result<SymbolBlock> {
    if block.is_empty() {
        return Err(Error::invalid("empty block"));
    }
    Transformer::new(block.len(), 1).idft(block)
}

/// Places a length-M block on N subcarriers; unoccupied subcarriers are zero.
pub fn map_subcarriers(block: &FreqBlock, params: &ScFdmaParams) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); params.n];
    map_into(&block.0, params, &mut out)?;
    Ok(out)
}

pub(crate) fn map_into(block: &[Complex64], params: &ScFdmaParams, out: &mut [Complex64]) -> Result<()> {
    if block.len() != params.m {
        return Err(Error::invalid(format!("expected {} symbols, got {}", params.m, block.len())));
    }
    out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    match params.mapping {
        Mapping::Interleaved => {
            let lambda = params.n / params.m;
            if lambda * params.m != params.n {
                return Err(Error::config("interleaved mapping needs N = lambda * M"));
            }
            for (m, &v) in block.iter().enumerate() {
                out[lambda * m] = v;
            }
        }
        Mapping::Localized { start } => {
            if start + params.m > params.n {
                return Err(Error::config(format!("localized band exceeds N = {}", params.n)));
            }
            out[start..start + params.m].copy_from_slice(block);
        }
    }
    Ok(())
}

/// Unitary N-point inverse transform of a mapped block with a `cp`-sample
/// cyclic prefix; `N = mapped.len()`.
pub fn idft_cp(mapped: &[Complex64], cp: usize) -> Result<Vec<Complex64>> {
    if mapped.is_empty() {
        return Err(Error::invalid("empty block"));
    }
    Transformer::new(1, mapped.len()).idft_cp(mapped, cp)
}
