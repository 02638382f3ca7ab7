//! Two-antenna SC-FDMA transmitter with Alamouti or spatial-multiplexing
//! space-time coding.
//!
//! Per antenna the chain is: constellation symbols -> unitary M-point DFT ->
//! space-time encoding -> subcarrier mapping -> unitary N-point IDFT ->
//! cyclic prefix.

mod frame;
mod stbc;
mod symmetry;
mod transform;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};

pub use frame::{synthesize_frame, synthesize_frame_from_symbols, TxFrame};
pub use stbc::{stbc_encode, EncodedSlots};
pub use symmetry::{alamouti_symmetry_cases, BlockParity, SymmetryCase};
pub use transform::{dft_block, idft_block, idft_cp, map_subcarriers, Transformer};

/// Placement of the M precoded symbols on the N subcarriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mapping {
    /// Symbol `m` on subcarrier `lambda * m`.
    Interleaved,
    /// Symbols on the contiguous subcarriers `start..start + M`.
    Localized { start: usize },
}

/// Waveform geometry shared by every stage of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScFdmaParams {
    /// Subcarriers, i.e. samples in the useful part of a block.
    pub n: usize,
    /// Data symbols per block.
    pub m: usize,
    /// Cyclic prefix length in samples.
    pub cp: usize,
    pub mapping: Mapping,
    pub constellation: Constellation,
}

impl ScFdmaParams {
    /// Interleaved mapping with `n = lambda * m`.
    pub fn interleaved(n: usize, lambda: usize, cp: usize, constellation: Constellation) -> Result<Self> {
        if lambda == 0 || !n.is_multiple_of(lambda) {
            return Err(Error::config(format!("N = {n} is not a multiple of lambda = {lambda}")));
        }
        let p = ScFdmaParams {
            n,
            m: n / lambda,
            cp,
            mapping: Mapping::Interleaved,
            constellation,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn localized(n: usize, m: usize, start: usize, cp: usize, constellation: Constellation) -> Result<Self> {
        let p = ScFdmaParams {
            n,
            m,
            cp,
            mapping: Mapping::Localized { start },
            constellation,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.cp == 0 {
            return Err(Error::config("N, M and the cyclic prefix length must be positive"));
        }
        if self.cp >= self.n {
            return Err(Error::config(format!(
                "cyclic prefix {} must be shorter than N = {}",
                self.cp, self.n
            )));
        }
        if self.m > self.n {
            return Err(Error::config(format!("M = {} exceeds N = {}", self.m, self.n)));
        }
        match self.mapping {
            Mapping::Interleaved => {
                if !self.n.is_multiple_of(self.m) {
                    return Err(Error::config(format!(
                        "interleaved mapping needs N = lambda * M with integer lambda (N = {}, M = {})",
                        self.n, self.m
                    )));
                }
            }
            Mapping::Localized { start } => {
                if start + self.m > self.n {
                    return Err(Error::config(format!(
                        "localized band {}..{} exceeds N = {}",
                        start,
                        start + self.m,
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    /// Samples per block including the prefix.
    pub fn block_len(&self) -> usize {
        self.n + self.cp
    }

    /// Bandwidth expansion `N / M`.
    pub fn expansion(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    /// Integer expansion factor for interleaved mapping.
    pub fn interleave_factor(&self) -> Option<usize> {
        match self.mapping {
            Mapping::Interleaved => Some(self.n / self.m),
            Mapping::Localized { .. } => None,
        }
    }
}

/// Space-time coding scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StbcScheme {
    #[serde(rename = "AL")]
    Alamouti,
    #[serde(rename = "SM")]
    SpatialMultiplexing,
}

impl StbcScheme {
    pub const BOTH: [StbcScheme; 2] = [StbcScheme::Alamouti, StbcScheme::SpatialMultiplexing];

    /// Time slots per code block (`U`).
    pub fn code_length(self) -> usize {
        match self {
            StbcScheme::Alamouti => 2,
            StbcScheme::SpatialMultiplexing => 1,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            StbcScheme::Alamouti => "AL",
            StbcScheme::SpatialMultiplexing => "SM",
        }
    }
}

impl fmt::Display for StbcScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for StbcScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AL" | "ALAMOUTI" => Ok(StbcScheme::Alamouti),
            "SM" => Ok(StbcScheme::SpatialMultiplexing),
            other => Err(Error::config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// M unit-variance data symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock(pub Vec<Complex64>);

/// M frequency-domain symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqBlock(pub Vec<Complex64>);

impl SymbolBlock {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FreqBlock {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn conj(&self) -> FreqBlock {
        FreqBlock(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn neg_conj(&self) -> FreqBlock {
        FreqBlock(self.0.iter().map(|z| -z.conj()).collect())
    }
}

/// Draws `m` i.i.d. uniform points of `constellation`.
pub fn draw_symbol_block<R: Rng + ?Sized>(rng: &mut R, constellation: Constellation, m: usize) -> Result<SymbolBlock> {
    if m == 0 {
        return Err(Error::config("symbol block length must be positive"));
    }
    Ok(SymbolBlock((0..m).map(|_| constellation.draw(rng)).collect()))
}
