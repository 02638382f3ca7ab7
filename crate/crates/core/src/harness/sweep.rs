use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ImpairmentPoint};
use crate::channel::receive;
use crate::error::{Error, Result};
use crate::identifier::{compute_threshold, decide, FeatureEstimator, FeatureVector};
use crate::modem::{synthesize_frame, Mapping, ScFdmaParams, StbcScheme};
use crate::rng::{derive_seed, from_seed};
use crate::theory::{p_correct, CorrectProbability, TheoryScenario};

/// Label mixed into theory seeds so they never collide with trial seeds.
const THEORY_STREAM: u64 = 0x7468_656f;

/// One waveform/impairment/SNR combination of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub label: String,
    pub params: ScFdmaParams,
    pub impairment: ImpairmentPoint,
    pub snr_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub scheme: StbcScheme,
    pub declared: StbcScheme,
    pub statistic: f64,
}

impl TrialOutcome {
    pub fn correct(&self) -> bool {
        self.scheme == self.declared
    }
}

/// Aggregated outcome of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub curve: String,
    pub n: usize,
    pub m: usize,
    pub cp: usize,
    pub mapping: String,
    pub constellation: String,
    pub snr_db: f64,
    pub timing_offset: f64,
    pub freq_offset: f64,
    pub doppler: f64,
    pub n_blocks: usize,
    pub p_f: f64,
    pub trials_al: usize,
    pub correct_al: usize,
    pub trials_sm: usize,
    pub correct_sm: usize,
    pub p_al: Option<f64>,
    pub p_sm: Option<f64>,
    pub p_c: Option<f64>,
    /// Binomial standard error of `p_c`.
    pub std_err: Option<f64>,
    pub theory_p_c: Option<f64>,
    pub theory_std_err: Option<f64>,
    pub wall_time_s: f64,
}

impl ResultRow {
    fn new(cfg: &ExperimentConfig, point: &GridPoint) -> Self {
        let p = &point.params;
        ResultRow {
            experiment: cfg.name.clone(),
            curve: point.label.clone(),
            n: p.n,
            m: p.m,
            cp: p.cp,
            mapping: match p.mapping {
                Mapping::Interleaved => "interleaved".into(),
                Mapping::Localized { .. } => "localized".into(),
            },
            constellation: p.constellation.to_string(),
            snr_db: point.snr_db,
            timing_offset: point.impairment.timing_offset,
            freq_offset: point.impairment.freq_offset,
            doppler: point.impairment.doppler,
            n_blocks: cfg.n_blocks,
            p_f: cfg.p_f,
            trials_al: 0,
            correct_al: 0,
            trials_sm: 0,
            correct_sm: 0,
            p_al: None,
            p_sm: None,
            p_c: None,
            std_err: None,
            theory_p_c: None,
            theory_std_err: None,
            wall_time_s: 0.0,
        }
    }

    fn record(&mut self, outcomes: &[TrialOutcome]) {
        for o in outcomes {
            let (trials, correct) = match o.scheme {
                StbcScheme::Alamouti => (&mut self.trials_al, &mut self.correct_al),
                StbcScheme::SpatialMultiplexing => (&mut self.trials_sm, &mut self.correct_sm),
            };
            *trials += 1;
            *correct += o.correct() as usize;
        }
        let rate = |c: usize, t: usize| (t > 0).then(|| c as f64 / t as f64);
        self.p_al = rate(self.correct_al, self.trials_al);
        self.p_sm = rate(self.correct_sm, self.trials_sm);
        if let (Some(a), Some(s)) = (self.p_al, self.p_sm) {
            self.p_c = Some(0.5 * (a + s));
            let var = a * (1.0 - a) / self.trials_al as f64 + s * (1.0 - s) / self.trials_sm as f64;
            self.std_err = Some(0.5 * var.sqrt());
        }
    }
}

/// Closed-form prediction for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryRow {
    pub curve: String,
    pub snr_db: f64,
    pub p_al: f64,
    pub p_c: f64,
    pub std_err: f64,
    pub draws: usize,
}

fn frame_blocks(n_blocks: usize) -> usize {
    // Two spare blocks cover the random start offset; keep Alamouti pairs whole.
    let b = n_blocks + 2;
    b + b % 2
}

/// Received samples of one trial, trimmed to `n_blocks` whole block lengths.
fn trial_samples(seed: u64, scheme: StbcScheme, point: &GridPoint, cfg: &ExperimentConfig) -> Result<Vec<crate::Complex64>> {
    let mut rng = from_seed(seed);
    let p = &point.params;
    let block = p.block_len();
    let frame = synthesize_frame(&mut rng, scheme, p, frame_blocks(cfg.n_blocks))?;
    let ch = cfg.channel.draw(&mut rng, point.impairment.doppler, p.n, block)?;
    let imp = point.impairment.at(point.snr_db);
    let rx = receive(&mut rng, &frame, &ch, &imp, cfg.channel.filter.as_ref())?;
    let offset = if cfg.synchronized { 0 } else { rng.random_range(0..block) };
    let end = offset + cfg.n_blocks * block;
    if rx.samples.len() < end {
        return Err(Error::invalid("received frame shorter than the trial window"));
    }
    Ok(rx.samples[offset..end].to_vec())
}

/// Synthesize, propagate and identify once; `seed` fixes every random draw.
pub fn run_trial(seed: u64, scheme: StbcScheme, point: &GridPoint, cfg: &ExperimentConfig) -> Result<TrialOutcome> {
    let samples = trial_samples(seed, scheme, point, cfg)?;
    let p = &point.params;
    let fv = FeatureEstimator::new(p)
        .with_variance_lag(cfg.variance_lag)
        .estimate(&samples)?;
    let report = decide(&fv, compute_threshold(cfg.p_f, p.n, p.cp)?);
    Ok(TrialOutcome {
        scheme,
        declared: report.declared,
        statistic: report.statistic,
    })
}

/// Feature of a single trial, as used for peak-structure dumps.
pub fn feature_point(seed: u64, scheme: StbcScheme, point: &GridPoint, cfg: &ExperimentConfig) -> Result<FeatureVector> {
    let samples = trial_samples(seed, scheme, point, cfg)?;
    FeatureEstimator::new(&point.params)
        .with_variance_lag(cfg.variance_lag)
        .estimate(&samples)
}

fn scheme_label(s: StbcScheme) -> u64 {
    match s {
        StbcScheme::Alamouti => 0,
        StbcScheme::SpatialMultiplexing => 1,
    }
}

fn theory_applicable(point: &GridPoint) -> bool {
    point.impairment.is_clean() && point.params.interleave_factor().is_some()
}

fn theory_at(cfg: &ExperimentConfig, point: &GridPoint, draws: usize) -> Result<CorrectProbability> {
    let scenario = TheoryScenario {
        params: point.params,
        n_blocks: cfg.n_blocks,
        p_f: cfg.p_f,
        snr_db: point.snr_db,
    };
    let mut rng = from_seed(derive_seed(cfg.seed, &[point.index as u64, THEORY_STREAM]));
    p_correct(&mut rng, &scenario, &cfg.channel, draws)
}

/// Theory prediction, or `None` where the analysis does not apply.
fn joined_theory(cfg: &ExperimentConfig, point: &GridPoint) -> Result<Option<CorrectProbability>> {
    let Some(t) = &cfg.theory else {
        return Ok(None);
    };
    if !theory_applicable(point) {
        return Ok(None);
    }
    match theory_at(cfg, point, t.channel_draws) {
        Ok(c) => Ok(Some(c)),
        Err(Error::UnsupportedAnalysis(msg)) => {
            log::debug!("{}: no theory ({msg})", point.label);
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Runs every grid point and hands each finished row to `on_row` before
/// starting the next, so partial results survive an interruption.
pub fn run_sweep_with<F>(cfg: &ExperimentConfig, mut on_row: F) -> Result<Vec<ResultRow>>
where
    F: FnMut(&ResultRow) -> Result<()>,
{
    cfg.validate()?;
    let grid = cfg.grid()?;
    let mut rows = Vec::with_capacity(grid.len());
    for point in &grid {
        let start = Instant::now();
        let jobs: Vec<(StbcScheme, usize)> = cfg
            .schemes
            .iter()
            .flat_map(|&s| (0..cfg.trials).map(move |t| (s, t)))
            .collect();
        let outcomes = jobs
            .par_iter()
            .map(|&(s, t)| {
                let seed = derive_seed(cfg.seed, &[point.index as u64, scheme_label(s), t as u64]);
                run_trial(seed, s, point, cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut row = ResultRow::new(cfg, point);
        row.record(&outcomes);
        if let Some(t) = joined_theory(cfg, point)? {
            row.theory_p_c = Some(t.p_c);
            row.theory_std_err = Some(t.std_err);
        }
        row.wall_time_s = start.elapsed().as_secs_f64();
        log::info!("{} snr={} p_c={:?} ({:.1}s)", row.curve, row.snr_db, row.p_c, row.wall_time_s);
        on_row(&row)?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_sweep_with(cfg, |_| Ok(()))
}

/// Closed-form `P(AL|AL)` and `P_c` for every clean interleaved grid point.
pub fn theory_rows(cfg: &ExperimentConfig) -> Result<Vec<TheoryRow>> {
    cfg.validate()?;
    let draws = cfg.theory.map(|t| t.channel_draws).unwrap_or(2000);
    let grid = cfg.grid()?;
    let usable: Vec<&GridPoint> = grid.iter().filter(|p| theory_applicable(p)).collect();
    if usable.is_empty() {
        return Err(Error::config("no grid point is covered by the closed-form analysis"));
    }
    usable
        .par_iter()
        .map(|p| {
            let c = theory_at(cfg, p, draws)?;
            Ok(TheoryRow {
                curve: p.label.clone(),
                snr_db: p.snr_db,
                p_al: c.p_al,
                p_c: c.p_c,
                std_err: c.std_err,
                draws: c.draws,
            })
        })
        .collect()
}

/// The six impairment columns: two timing offsets, two frequency offsets
/// and two Doppler frequencies, one impairment at a time.
pub fn impairment_table_points() -> Vec<ImpairmentPoint> {
    let mut v = Vec::with_capacity(6);
    for mu in [0.25, 0.5] {
        v.push(ImpairmentPoint {
            timing_offset: mu,
            ..Default::default()
        });
    }
    for df in [1e-4, 5e-4] {
        v.push(ImpairmentPoint {
            freq_offset: df,
            ..Default::default()
        });
    }
    for fd in [1e-4, 1e-3] {
        v.push(ImpairmentPoint {
            doppler: fd,
            ..Default::default()
        });
    }
    v
}

/// Runs `base` over the impairment table at 5 and 10 dB; rows come out
/// column by column with the two SNRs adjacent.
pub fn impairment_table(base: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut cfg = base.clone();
    cfg.impairments = impairment_table_points();
    cfg.snr_db = vec![5.0, 10.0];
    cfg.theory = None;
    run_sweep(&cfg)
}
