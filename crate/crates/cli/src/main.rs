use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scfdma_stbc::harness::{
    dump_feature, emit_plotdata, impairment_table, run_sweep_with, theory_rows, write_feature_dump, ExperimentConfig, PlotKind,
    SweepWriter,
};
use scfdma_stbc::identifier::identify;
use scfdma_stbc::iq::{read_iq, IqKind};
use scfdma_stbc::{Error, Result};

#[derive(Parser)]
#[command(name = "scfdma-id", version, about = "Blind AL/SM identification for SC-FDMA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write rows, per-curve CSV and a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output` or `out/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Start every trial at a block boundary.
        #[arg(long)]
        synchronized: bool,
        /// Replace the impairment and SNR grids with the fixed 2 x 6 table.
        #[arg(long)]
        impairment_table: bool,
        /// Override the number of trials per point and scheme.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Closed-form P(AL|AL) and P_c for each grid point, as CSV.
    Theory {
        #[arg(long)]
        config: PathBuf,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Identify the coding of a recorded IQ capture.
    Identify {
        #[arg(long)]
        iq: PathBuf,
        #[arg(long)]
        meta: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        p_f: f64,
    },
    /// Write (tau, |A(tau)|) for one Alamouti trial at the first grid point.
    DumpFeature {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn simulate(config: &Path, out: Option<PathBuf>, synchronized: bool, table: bool, trials: Option<usize>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    cfg.synchronized |= synchronized;
    if let Some(t) = trials {
        cfg.trials = t;
        cfg.validate()?;
    }
    let dir = out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| Path::new("out").join(&cfg.name));
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let rows = if table {
        let rows = impairment_table(&cfg)?;
        let mut w = SweepWriter::create(&dir.join("rows.jsonl"))?;
        for r in &rows {
            w.push(r)?;
        }
        rows
    } else {
        let mut w = SweepWriter::create(&dir.join("rows.jsonl"))?;
        run_sweep_with(&cfg, |r| w.push(r))?
    };
    let kind = if table { PlotKind::Table } else { PlotKind::Sweep };
    for path in emit_plotdata(&rows, kind, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn theory(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let rows = theory_rows(&cfg)?;
    let sink: Box<dyn std::io::Write> = match &out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        })?),
        None => Box::new(std::io::stdout()),
    };
    let path = out.unwrap_or_else(|| PathBuf::from("<stdout>"));
    let fail = |e: csv::Error| Error::Format {
        path: path.clone(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in &rows {
        w.serialize(r).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })
}

fn identify_capture(iq: &Path, meta: &Path, p_f: f64) -> Result<()> {
    let (m, channels) = read_iq(iq, meta)?;
    if m.kind != IqKind::Received || channels.len() != 1 {
        return Err(Error::Format {
            path: meta.to_path_buf(),
            message: "expected a single-channel received capture".into(),
        });
    }
    let mut report = identify(&channels[0], &m.params, p_f)?;
    report.seed = m.seed;
    println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    Ok(())
}

fn dump(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let d = dump_feature(&cfg)?;
    match out {
        Some(p) => write_feature_dump(&p, &d),
        None => {
            println!("tau,magnitude");
            for (tau, m) in d.magnitude.iter().enumerate() {
                println!("{tau},{m}");
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            synchronized,
            impairment_table,
            trials,
        } => simulate(&config, out, synchronized, impairment_table, trials),
        Command::Theory { config, out } => theory(&config, out),
        Command::Identify { iq, meta, p_f } => identify_capture(&iq, &meta, p_f),
        Command::DumpFeature { config, out } => dump(&config, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
