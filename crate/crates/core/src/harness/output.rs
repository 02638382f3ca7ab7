use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sweep::{feature_point, ResultRow};
use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::identifier::REPORTED_PEAKS;
use crate::modem::{ScFdmaParams, StbcScheme};
use crate::rng::derive_seed;

/// Appends rows to a JSON-lines file, flushing after each one.
pub struct SweepWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl SweepWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(SweepWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        })
    }

    pub fn push(&mut self, row: &ResultRow) -> Result<()> {
        let line = serde_json::to_string(row).expect("result rows serialize");
        writeln!(self.out, "{line}")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    /// One CSV per curve with SNR on the x axis.
    Sweep,
    /// A single SNR x impairment table of `P_c`.
    Table,
}

#[derive(Serialize)]
struct CurvePoint {
    snr_db: f64,
    p_al: Option<f64>,
    p_sm: Option<f64>,
    p_c: Option<f64>,
    std_err: Option<f64>,
    theory_p_c: Option<f64>,
    theory_std_err: Option<f64>,
    trials_al: usize,
    trials_sm: usize,
}

#[derive(Serialize)]
struct TableCell<'a> {
    snr_db: f64,
    impairment: &'a str,
    timing_offset: f64,
    freq_offset: f64,
    doppler: f64,
    p_c: Option<f64>,
    std_err: Option<f64>,
}

#[derive(Serialize)]
struct ManifestCurve {
    file: String,
    curve: String,
    n: usize,
    m: usize,
    cp: usize,
    mapping: String,
    constellation: String,
    timing_offset: f64,
    freq_offset: f64,
    doppler: f64,
    points: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    kind: PlotKind,
    n_blocks: usize,
    p_f: f64,
    curves: Vec<ManifestCurve>,
}

fn impairment_tag(r: &ResultRow) -> String {
    let mut parts = Vec::new();
    if r.timing_offset != 0.0 {
        parts.push(format!("mu{}", r.timing_offset));
    }
    if r.freq_offset != 0.0 {
        parts.push(format!("df{}", r.freq_offset));
    }
    if r.doppler != 0.0 {
        parts.push(format!("fd{}", r.doppler));
    }
    if parts.is_empty() {
        "clean".into()
    } else {
        parts.join("_")
    }
}

fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let wrap = |e: csv::Error| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    for r in records {
        w.serialize(r).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes plot data into `dir` and returns the paths written, manifest last.
///
/// Files contain no timing information, so reruns with the same seed give
/// byte-identical output.
pub fn emit_plotdata(rows: &[ResultRow], kind: PlotKind, dir: &Path) -> Result<Vec<PathBuf>> {
    let first = rows.first().ok_or_else(|| Error::invalid("no result rows to write"))?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut curves = Vec::new();
    match kind {
        PlotKind::Sweep => {
            let mut groups: BTreeMap<String, Vec<&ResultRow>> = BTreeMap::new();
            let mut order = Vec::new();
            for r in rows {
                let key = format!("{}__{}", r.curve, impairment_tag(r));
                if !groups.contains_key(&key) {
                    order.push(key.clone());
                }
                groups.entry(key).or_default().push(r);
            }
            for key in order {
                let group = &groups[&key];
                let file = format!("{}.csv", file_stem(&key));
                let path = dir.join(&file);
                write_csv(
                    &path,
                    group.iter().map(|r| CurvePoint {
                        snr_db: r.snr_db,
                        p_al: r.p_al,
                        p_sm: r.p_sm,
                        p_c: r.p_c,
                        std_err: r.std_err,
                        theory_p_c: r.theory_p_c,
                        theory_std_err: r.theory_std_err,
                        trials_al: r.trials_al,
                        trials_sm: r.trials_sm,
                    }),
                )?;
                let r = group[0];
                curves.push(ManifestCurve {
                    file,
                    curve: r.curve.clone(),
                    n: r.n,
                    m: r.m,
                    cp: r.cp,
                    mapping: r.mapping.clone(),
                    constellation: r.constellation.clone(),
                    timing_offset: r.timing_offset,
                    freq_offset: r.freq_offset,
                    doppler: r.doppler,
                    points: group.len(),
                });
                written.push(path);
            }
        }
        PlotKind::Table => {
            let file = format!("{}.csv", file_stem(&first.experiment));
            let path = dir.join(&file);
            let tags: Vec<String> = rows.iter().map(impairment_tag).collect();
            write_csv(
                &path,
                rows.iter().zip(&tags).map(|(r, tag)| TableCell {
                    snr_db: r.snr_db,
                    impairment: tag,
                    timing_offset: r.timing_offset,
                    freq_offset: r.freq_offset,
                    doppler: r.doppler,
                    p_c: r.p_c,
                    std_err: r.std_err,
                }),
            )?;
            curves.push(ManifestCurve {
                file,
                curve: first.curve.clone(),
                n: first.n,
                m: first.m,
                cp: first.cp,
                mapping: first.mapping.clone(),
                constellation: first.constellation.clone(),
                timing_offset: 0.0,
                freq_offset: 0.0,
                doppler: 0.0,
                points: rows.len(),
            });
            written.push(path);
        }
    }
    let manifest = Manifest {
        experiment: &first.experiment,
        kind,
        n_blocks: first.n_blocks,
        p_f: first.p_f,
        curves,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// `|A(tau)|` of one Alamouti trial at the first grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDump {
    pub curve: String,
    pub params: ScFdmaParams,
    pub snr_db: f64,
    pub seed: u64,
    pub magnitude: Vec<f64>,
    pub peaks: Vec<(usize, f64)>,
    pub gamma_max: f64,
}

pub fn dump_feature(cfg: &ExperimentConfig) -> Result<FeatureDump> {
    cfg.validate()?;
    let point = cfg.grid()?.swap_remove(0);
    let seed = derive_seed(cfg.seed, &[point.index as u64, 0, 0]);
    let fv = feature_point(seed, StbcScheme::Alamouti, &point, cfg)?;
    Ok(FeatureDump {
        curve: point.label,
        params: point.params,
        snr_db: point.snr_db,
        seed,
        magnitude: fv.a_r.iter().map(|a| a.norm()).collect(),
        peaks: fv.peaks(REPORTED_PEAKS),
        gamma_max: fv.gamma_max,
    })
}

#[derive(Serialize)]
struct TauRow {
    tau: usize,
    magnitude: f64,
}

/// Writes `(tau, |A(tau)|)` rows.
pub fn write_feature_dump(path: &Path, dump: &FeatureDump) -> Result<()> {
    write_csv(
        path,
        dump.magnitude
            .iter()
            .enumerate()
            .map(|(tau, &magnitude)| TauRow { tau, magnitude }),
    )
}
