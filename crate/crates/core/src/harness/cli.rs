//! Command line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::{
    emit_csv, emit_plot, load_datasets, piecewise_hparam_sweep, run_rows, DatasetSpec, ExperimentConfig,
    HarnessError, LorentzianSpec, Method, OdeSpec, ResultRow, ResultsTable,
};
use crate::bpnn::Checkpoint;
use crate::datasets::save_spectral_file;

#[derive(Debug, Parser)]
#[command(name = "phaseret", version, about = "Phase retrieval from magnitude-only frequency responses")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Experiment config (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the global seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic train/test pair in the dataset text format
    Gen {
        /// Generator: lorentzian or ode
        #[arg(long)]
        dataset: String,
        #[command(flatten)]
        common: Common,
    },
    /// Train one method at one training size
    Train {
        /// bpnn, piecewise-bpnn, fcnn-grid, kk, aaa-net, music or linear-bp
        #[arg(long)]
        method: String,
        /// Defaults to the largest configured size
        #[arg(long)]
        train_size: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the full experiment and write results.csv, results.svg and,
    /// when configured, the piecewise heatmap
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Re-render the figure from a results CSV
    Report {
        /// Results CSV
        #[arg(long)]
        input: PathBuf,
        /// Output SVG; defaults to the input with an .svg extension
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `argv` (program name first) and runs the command. Returns 0 on
/// success, 1 on usage errors and 2 when the run fails.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Failed) => 2,
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

enum CliError {
    Usage(String),
    Failed,
    Run(HarnessError),
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::Run(e)
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| CliError::Usage(e.to_string()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(jobs) = common.jobs {
        cfg.jobs = jobs;
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, body: &str) -> Result<(), HarnessError> {
    std::fs::write(path, body).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn print_row(row: &ResultRow) {
    match row.best_mse_db() {
        Some(db) => eprintln!(
            "{} {} n={} seed={}: {db:.2} dB",
            row.method, row.arch, row.train_size, row.seed
        ),
        None => eprintln!("{} {} n={} seed={}: {}", row.method, row.arch, row.train_size, row.seed, row.status),
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen { dataset, common } => {
            let cfg = load_config(&common)?;
            let spec = match (dataset.as_str(), &cfg.dataset) {
                ("lorentzian", DatasetSpec::Lorentzian(l)) => DatasetSpec::Lorentzian(l.clone()),
                ("lorentzian", _) => DatasetSpec::Lorentzian(LorentzianSpec::default()),
                ("ode", DatasetSpec::Ode(o)) => DatasetSpec::Ode(o.clone()),
                ("ode", _) => DatasetSpec::Ode(OdeSpec::default()),
                (other, _) => return Err(CliError::Usage(format!("unknown dataset {other:?}; use lorentzian or ode"))),
            };
            let (train, test) = load_datasets(&spec, cfg.seed)?;
            create_dir(&cfg.out_dir)?;
            for (part, data) in [("train", &train), ("test", &test)] {
                let path = cfg.out_dir.join(format!("{dataset}_{part}.txt"));
                save_spectral_file(data, &path).map_err(HarnessError::from)?;
                eprintln!("wrote {} ({} spectra)", path.display(), data.len());
            }
            Ok(())
        }
        Command::Train {
            method,
            train_size,
            common,
        } => {
            let mut cfg = load_config(&common)?;
            let method = Method::parse(&method).ok_or_else(|| CliError::Usage(format!("unknown method {method:?}")))?;
            let size = train_size.unwrap_or(*cfg.train_sizes.last().expect("validated"));
            cfg.methods = vec![method];
            cfg.train_sizes = vec![size];
            cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let (train, test) = load_datasets(&cfg.dataset, cfg.seed)?;
            let (rows, models) = run_rows(&cfg, &train, &test, print_row, true)?;
            create_dir(&cfg.out_dir)?;
            for (row, model) in rows.iter().zip(&models) {
                if let Some(model) = model {
                    let path = cfg.out_dir.join(format!("{}-n{}-seed{}.ckpt", row.arch, row.train_size, row.seed));
                    Checkpoint::from_model(model)
                        .save(&path)
                        .map_err(HarnessError::from)?;
                }
            }
            let failed = rows.iter().all(|r| !r.is_ok());
            let table = ResultsTable::new(rows);
            let path = cfg.out_dir.join(format!("train-{}.csv", method.name()));
            emit_csv(&table, &path)?;
            print!("{}", table.to_csv_string());
            if failed {
                eprintln!("error: every run failed");
                return Err(CliError::Failed);
            }
            Ok(())
        }
        Command::Sweep { common } => {
            let cfg = load_config(&common)?;
            let (train, test) = load_datasets(&cfg.dataset, cfg.seed)?;
            let (rows, _) = run_rows(&cfg, &train, &test, print_row, false)?;
            let table = ResultsTable::new(rows);
            create_dir(&cfg.out_dir)?;
            write_file(&cfg.out_dir.join("config.toml"), &cfg.to_toml_string())?;
            emit_csv(&table, cfg.out_dir.join("results.csv"))?;
            emit_plot(&table, cfg.out_dir.join("results.svg"))?;
            if let Some(section) = &cfg.piecewise_sweep {
                let heat = piecewise_hparam_sweep(section, &train, &test, cfg.seed, cfg.jobs)?;
                heat.emit(&cfg.out_dir, "heatmap")?;
            }
            eprintln!("wrote results to {}", cfg.out_dir.display());
            Ok(())
        }
        Command::Report { input, out } => {
            let table = ResultsTable::read_csv(&input)?;
            let out = out.unwrap_or_else(|| input.with_extension("svg"));
            emit_plot(&table, &out)?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
    }
}
