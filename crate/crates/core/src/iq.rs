//! Binary IQ dumps with a JSON sidecar.
//!
//! The binary file holds interleaved little-endian `f32` (re, im) pairs,
//! one channel after the other. The sidecar records the waveform and how
//! the samples were produced; the scheme is absent for captures whose
//! coding is unknown.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modem::{ScFdmaParams, StbcScheme, TxFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IqKind {
    /// Per-antenna transmit frame.
    Frame,
    /// Single-antenna received sequence.
    Received,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqMeta {
    pub kind: IqKind,
    pub params: ScFdmaParams,
    #[serde(default)]
    pub scheme: Option<StbcScheme>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub channels: usize,
    pub samples_per_channel: usize,
    #[serde(default)]
    pub snr_db: Option<f64>,
}

impl IqMeta {
    pub fn received(params: ScFdmaParams, samples: usize) -> Self {
        IqMeta {
            kind: IqKind::Received,
            params,
            scheme: None,
            seed: None,
            channels: 1,
            samples_per_channel: samples,
            snr_db: None,
        }
    }
}

fn encode(channels: &[&[Complex64]]) -> Vec<u8> {
    let total: usize = channels.iter().map(|c| c.len()).sum();
    let mut out = Vec::with_capacity(total * 8);
    for ch in channels {
        for v in ch.iter() {
            out.extend_from_slice(&(v.re as f32).to_le_bytes());
            out.extend_from_slice(&(v.im as f32).to_le_bytes());
        }
    }
    out
}

/// Writes `channels` (all of equal length) and the sidecar.
pub fn write_iq(bin: &Path, sidecar: &Path, channels: &[&[Complex64]], meta: &IqMeta) -> Result<()> {
    if channels.len() != meta.channels || channels.iter().any(|c| c.len() != meta.samples_per_channel) {
        return Err(Error::invalid("IQ metadata does not match the channel data"));
    }
    fs::write(bin, encode(channels)).map_err(|e| Error::io(bin, e))?;
    let json = serde_json::to_string_pretty(meta).expect("IQ metadata serializes");
    fs::write(sidecar, json).map_err(|e| Error::io(sidecar, e))
}

/// Dumps both antenna sequences of a frame.
pub fn write_frame(bin: &Path, sidecar: &Path, frame: &TxFrame) -> Result<()> {
    let meta = IqMeta {
        kind: IqKind::Frame,
        params: frame.params,
        scheme: Some(frame.scheme),
        seed: frame.seed,
        channels: 2,
        samples_per_channel: frame.len(),
        snr_db: None,
    };
    write_iq(bin, sidecar, &[&frame.antennas[0], &frame.antennas[1]], &meta)
}

pub fn read_meta(sidecar: &Path) -> Result<IqMeta> {
    let text = fs::read_to_string(sidecar).map_err(|e| Error::io(sidecar, e))?;
    let meta: IqMeta = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: sidecar.to_path_buf(),
        message: e.to_string(),
    })?;
    meta.params.validate()?;
    Ok(meta)
}

/// Reads a dump; returns the sidecar and one vector per channel.
pub fn read_iq(bin: &Path, sidecar: &Path) -> Result<(IqMeta, Vec<Vec<Complex64>>)> {
    let meta = read_meta(sidecar)?;
    let bytes = fs::read(bin).map_err(|e| Error::io(bin, e))?;
    let expected = meta.channels * meta.samples_per_channel * 8;
    if bytes.len() != expected {
        return Err(Error::Format {
            path: bin.to_path_buf(),
            message: format!("{} bytes, sidecar implies {expected}", bytes.len()),
        });
    }
    let samples: Vec<Complex64> = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    let channels = samples
        .chunks(meta.samples_per_channel.max(1))
        .take(meta.channels)
        .map(|c| c.to_vec())
        .collect();
    Ok((meta, channels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Constellation;
    use crate::modem::synthesize_frame;
    use crate::rng;

    #[test]
    fn frame_round_trip_at_single_precision() {
        let dir = tempfile::tempdir().unwrap();
        let p = ScFdmaParams::interleaved(16, 2, 4, Constellation::Qam16).unwrap();
        let mut f = synthesize_frame(&mut rng::from_seed(3), StbcScheme::Alamouti, &p, 4).unwrap();
        f.seed = Some(3);
        let (bin, side) = (dir.path().join("f.iq"), dir.path().join("f.json"));
        write_frame(&bin, &side, &f).unwrap();
        let (meta, ch) = read_iq(&bin, &side).unwrap();
        assert_eq!(meta.scheme, Some(StbcScheme::Alamouti));
        assert_eq!(meta.seed, Some(3));
        assert_eq!(meta.params, p);
        assert_eq!(fs::metadata(&bin).unwrap().len(), 2 * 80 * 8);
        for a in 0..2 {
            for (x, y) in f.antennas[a].iter().zip(&ch[a]) {
                assert!((x - y).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn truncated_binary_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = ScFdmaParams::interleaved(8, 2, 2, Constellation::Qpsk).unwrap();
        let x = vec![Complex64::new(1.0, -1.0); 30];
        let (bin, side) = (dir.path().join("r.iq"), dir.path().join("r.json"));
        write_iq(&bin, &side, &[&x], &IqMeta::received(p, 30)).unwrap();
        let bytes = fs::read(&bin).unwrap();
        fs::write(&bin, &bytes[..bytes.len() - 3]).unwrap();
        let err = read_iq(&bin, &side).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
        assert!(read_iq(&dir.path().join("missing.iq"), &side).is_err());
    }

    #[test]
    fn mismatched_metadata_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = ScFdmaParams::interleaved(8, 2, 2, Constellation::Qpsk).unwrap();
        let x = vec![Complex64::new(0.0, 0.0); 5];
        let err = write_iq(&dir.path().join("a"), &dir.path().join("b"), &[&x], &IqMeta::received(p, 6));
        assert!(err.is_err());
    }
}
