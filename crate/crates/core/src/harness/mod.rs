//! Configuration-driven Monte Carlo experiments.
//!
//! An [`ExperimentConfig`] describes a grid of waveforms, impairment
//! settings and SNRs. Every grid point runs `trials` independent trials per
//! scheme; trial `t` of point `p` for scheme `s` draws everything from the
//! seed `derive_seed(seed, [p, s, t])`, so results do not depend on thread
//! count or scheduling.

mod output;
mod sweep;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, ImpairmentParams};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::identifier::DEFAULT_VARIANCE_LAG;
use crate::modem::{ScFdmaParams, StbcScheme};

pub use output::{dump_feature, emit_plotdata, write_feature_dump, FeatureDump, PlotKind, SweepWriter};
pub use sweep::{
    feature_point, impairment_table, impairment_table_points, run_sweep, run_sweep_with, run_trial, theory_rows, GridPoint,
    ResultRow, TheoryRow, TrialOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingKind {
    Interleaved,
    Localized,
}

/// Flat, file-friendly form of [`ScFdmaParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformConfig {
    pub n: usize,
    pub cp: usize,
    /// Expansion factor for interleaved mapping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    /// Occupied subcarriers for localized mapping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default = "default_mapping")]
    pub mapping: MappingKind,
    #[serde(default)]
    pub start: usize,
    #[serde(default = "default_constellation")]
    pub constellation: Constellation,
    /// Curve name in outputs; derived from the fields when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn default_mapping() -> MappingKind {
    MappingKind::Interleaved
}

fn default_constellation() -> Constellation {
    Constellation::Qpsk
}

impl WaveformConfig {
    pub fn interleaved(n: usize, lambda: usize, cp: usize, constellation: Constellation) -> Self {
        WaveformConfig {
            n,
            cp,
            lambda: Some(lambda),
            m: None,
            mapping: MappingKind::Interleaved,
            start: 0,
            constellation,
            label: None,
        }
    }

    pub fn params(&self) -> Result<ScFdmaParams> {
        match self.mapping {
            MappingKind::Interleaved => {
                let lambda = match (self.lambda, self.m) {
                    (Some(l), _) => l,
                    (None, Some(m)) if m > 0 && self.n.is_multiple_of(m) => self.n / m,
                    _ => return Err(Error::config("interleaved waveform needs `lambda` (or an `m` dividing `n`)")),
                };
                ScFdmaParams::interleaved(self.n, lambda, self.cp, self.constellation)
            }
            MappingKind::Localized => {
                let m = self.m.ok_or_else(|| Error::config("localized waveform needs `m`"))?;
                ScFdmaParams::localized(self.n, m, self.start, self.cp, self.constellation)
            }
        }
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match self.params() {
            Ok(p) => match self.mapping {
                MappingKind::Interleaved => format!("n{}_cp{}_il{}_{}", p.n, p.cp, p.n / p.m, p.constellation),
                MappingKind::Localized => format!("n{}_cp{}_loc{}_{}", p.n, p.cp, p.m, p.constellation),
            },
            Err(_) => format!("n{}_cp{}", self.n, self.cp),
        }
    }
}

/// One impairment column of the grid; the SNR comes from `snr_db`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpairmentPoint {
    #[serde(default)]
    pub timing_offset: f64,
    #[serde(default)]
    pub freq_offset: f64,
    #[serde(default)]
    pub doppler: f64,
}

impl ImpairmentPoint {
    pub fn at(&self, snr_db: f64) -> ImpairmentParams {
        ImpairmentParams {
            snr_db,
            timing_offset: self.timing_offset,
            freq_offset: self.freq_offset,
            doppler: self.doppler,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.timing_offset == 0.0 && self.freq_offset == 0.0 && self.doppler == 0.0
    }
}

/// Closed-form predictions joined to the simulated rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConfig {
    pub channel_draws: usize,
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: u64,
    pub n_blocks: usize,
    pub trials: usize,
    pub p_f: f64,
    pub snr_db: Vec<f64>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<StbcScheme>,
    /// Disable the random block-start offset of each trial.
    #[serde(default)]
    pub synchronized: bool,
    #[serde(default = "default_lag")]
    pub variance_lag: usize,
    #[serde(rename = "waveform")]
    pub waveforms: Vec<WaveformConfig>,
    pub channel: ChannelModel,
    #[serde(rename = "impairment", default = "default_impairments")]
    pub impairments: Vec<ImpairmentPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheoryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_schemes() -> Vec<StbcScheme> {
    StbcScheme::BOTH.to_vec()
}

fn default_lag() -> usize {
    DEFAULT_VARIANCE_LAG
}

fn default_impairments() -> Vec<ImpairmentPoint> {
    vec![ImpairmentPoint::default()]
}

impl ExperimentConfig {
    /// Desk-scale defaults: N = 128, cp = 16, N_B = 250, 200 trials.
    pub fn desk() -> Self {
        ExperimentConfig {
            name: "desk".into(),
            seed: 1,
            n_blocks: 250,
            trials: 200,
            p_f: 1e-3,
            snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            schemes: default_schemes(),
            synchronized: false,
            variance_lag: DEFAULT_VARIANCE_LAG,
            waveforms: vec![WaveformConfig::interleaved(128, 2, 16, Constellation::Qpsk)],
            channel: ChannelModel::rayleigh(3),
            impairments: default_impairments(),
            theory: None,
            output: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.snr_db.is_empty() || self.waveforms.is_empty() || self.impairments.is_empty() {
            return Err(Error::config("snr_db, waveform and impairment grids must be non-empty"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("at least one scheme is required"));
        }
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return Err(Error::config("SNR grid contains NaN"));
        }
        if !(self.p_f > 0.0 && self.p_f < 1.0) {
            return Err(Error::config(format!("p_f = {} outside (0, 1)", self.p_f)));
        }
        if self.variance_lag < 2 {
            return Err(Error::config("variance lag must be at least 2"));
        }
        if self.n_blocks < self.variance_lag + 2 {
            return Err(Error::config(format!(
                "n_blocks = {} is too short for variance lag {}",
                self.n_blocks, self.variance_lag
            )));
        }
        for w in &self.waveforms {
            w.params()?;
        }
        self.channel.validate()?;
        for imp in &self.impairments {
            imp.at(0.0).validate()?;
        }
        if let Some(t) = &self.theory {
            if t.channel_draws == 0 {
                return Err(Error::config("theory needs at least one channel draw"));
            }
        }
        Ok(())
    }

    /// Grid points in output order: waveform, then impairment, then SNR.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        let mut points = Vec::new();
        for w in &self.waveforms {
            let params = w.params()?;
            for imp in &self.impairments {
                for &snr in &self.snr_db {
                    points.push(GridPoint {
                        index: points.len(),
                        label: w.label(),
                        params,
                        impairment: *imp,
                        snr_db: snr,
                    });
                }
            }
        }
        Ok(points)
    }
}
