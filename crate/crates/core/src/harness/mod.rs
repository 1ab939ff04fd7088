//! Experiment orchestration: dataset selection, training-size sweeps over
//! the configured methods, result tables, figures and the command line.

mod cli;
mod config;
mod plot;
mod sweep;
mod table;

pub use cli::cli_main;
pub use config::{
    AaaNetSection, BpnnSection, DatasetSpec, ExperimentConfig, FcnnSection, LinearBpSection, LorentzianSpec, Method,
    MusicSection, OdeSpec, PiecewiseSection, PiecewiseSweepSection,
};
pub use plot::{emit_plot, render_svg, series, SeriesPoint};
pub use sweep::{piecewise_hparam_sweep, HeatCell, Heatmap};
pub use table::{emit_csv, to_db, ResultRow, ResultsTable, CSV_COLUMNS};

use crate::baselines::{
    aaa_network_pipeline, fcnn_run, kk_reconstruct, linear_bp, music_pipeline, FcnnHparams, MethodReport,
};
use crate::bpnn::{train_bpnn, BpnnModel};
use crate::datasets::{
    gen_lorentzian_dataset, gen_ode_dataset, load_spectral_file, take_subset, DatasetError, SpectralDataset,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("results CSV line {line}: {msg}")]
    Csv { line: u64, msg: String },
    #[error("nothing to write: the table is empty")]
    EmptyTable,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Checkpoint(#[from] crate::bpnn::CheckpointError),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Train and test sets described by `spec`; generators use `seed` unless the
/// spec pins its own.
pub fn load_datasets(spec: &DatasetSpec, seed: u64) -> Result<(SpectralDataset, SpectralDataset), HarnessError> {
    Ok(match spec {
        DatasetSpec::Lorentzian(l) => gen_lorentzian_dataset(&l.to_config(seed))?,
        DatasetSpec::Ode(o) => gen_ode_dataset(o.to_config(seed))?,
        DatasetSpec::Files { train, test } => (load_spectral_file(train)?, load_spectral_file(test)?),
    })
}

/// Maps `f` over `items` on a pool of `jobs` threads (0 = all cores).
/// Output order follows input order.
pub(crate) fn run_parallel<I, T, F>(jobs: usize, items: &[I], f: F) -> Result<Vec<T>, HarnessError>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[derive(Debug, Clone)]
enum JobKind {
    Bpnn(BpnnSection),
    LinearBp,
    Fcnn(FcnnHparams),
    Kk,
    AaaNet,
    Music,
}

#[derive(Debug, Clone)]
struct Job {
    size: usize,
    method: Method,
    arch: String,
    seed: u64,
    kind: JobKind,
}

fn jobs_for(config: &ExperimentConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &size in &config.train_sizes {
        for &method in &config.methods {
            let mut push = |arch: String, seed: u64, kind: JobKind| {
                jobs.push(Job {
                    size,
                    method,
                    arch,
                    seed,
                    kind,
                })
            };
            match method {
                Method::Bpnn | Method::PiecewiseBpnn => {
                    let section = if method == Method::Bpnn {
                        config.bpnn.clone()
                    } else {
                        config.piecewise_bpnn.as_bpnn()
                    };
                    for seed in config.seeds(section.seeds) {
                        push(section.arch(method.name()), seed, JobKind::Bpnn(section.clone()));
                    }
                }
                Method::LinearBp => {
                    for seed in config.seeds(config.linear_bp.seeds) {
                        push(format!("linear-bp-m{}", config.linear_bp.roots), seed, JobKind::LinearBp);
                    }
                }
                Method::FcnnGrid => {
                    let grid = config.fcnn.to_grid(config.seeds(config.fcnn.seeds));
                    for hp in grid.runs() {
                        push(fcnn_arch(hp.width, hp.depth), hp.seed, JobKind::Fcnn(hp));
                    }
                }
                Method::Kk => push("kk".into(), config.seed, JobKind::Kk),
                Method::AaaNet => {
                    for seed in config.seeds(config.aaa_net.seeds) {
                        push(format!("aaa-net-m{}", config.aaa_net.max_m), seed, JobKind::AaaNet);
                    }
                }
                Method::Music => {
                    for seed in config.seeds(config.music.seeds) {
                        push(format!("music-p{}", config.music.p), seed, JobKind::Music);
                    }
                }
            }
        }
    }
    jobs
}

fn fcnn_arch(width: usize, depth: usize) -> String {
    format!("fcnn-w{width}-d{depth}")
}

fn run_job(
    job: &Job,
    config: &ExperimentConfig,
    train_full: &SpectralDataset,
    test: &SpectralDataset,
) -> Result<(MethodReport, Option<BpnnModel>), String> {
    let idx: Vec<usize> = (0..job.size).collect();
    let train = take_subset(train_full, &idx);
    let err = |e: &dyn std::fmt::Display| e.to_string();
    match &job.kind {
        JobKind::Bpnn(section) => train_bpnn(&section.to_config(job.seed), &train, test)
            .map(|(r, m)| (r.into(), Some(m)))
            .map_err(|e| err(&e)),
        JobKind::LinearBp => {
            let lb = &config.linear_bp;
            let cfg = crate::bpnn::BpnnConfig {
                roots_per_segment: lb.roots,
                segments: 1,
                hidden: Vec::new(),
                dropout: 0.0,
                learning_rate: lb.learning_rate,
                epochs: lb.epochs,
                seed: job.seed,
            };
            linear_bp(&cfg, &train, test).map(|(r, m)| (r.into(), Some(m))).map_err(|e| err(&e))
        }
        JobKind::Fcnn(hp) => fcnn_run(hp, config.fcnn.epochs, &train, test)
            .map(|r| (r, None))
            .map_err(|e| err(&e)),
        JobKind::Kk => {
            let start = std::time::Instant::now();
            test.samples()
                .iter()
                .map(|s| {
                    let pred = kk_reconstruct(&s.magnitudes, test.omegas()).map_err(|e| err(&e))?;
                    Ok(pred.iter().zip(&s.values).map(|(p, t)| (p - t).norm_sqr()).sum::<f64>() / pred.len() as f64)
                })
                .collect::<Result<Vec<_>, String>>()
                .map(|e| (MethodReport::closed_form(e, start.elapsed().as_secs_f64()), None))
        }
        JobKind::AaaNet => aaa_network_pipeline(&config.aaa_net.to_config(job.seed), &train, test)
            .map(|r| (r, None))
            .map_err(|e| err(&e)),
        JobKind::Music => music_pipeline(&config.music.to_config(job.seed), &train, test)
            .map(|r| (r, None))
            .map_err(|e| err(&e)),
    }
}

fn row_for(dataset: &str, job: &Job, outcome: &Result<MethodReport, String>, wall_time: bool) -> ResultRow {
    let mut row = ResultRow {
        dataset: dataset.to_string(),
        method: job.method.name().to_string(),
        arch: job.arch.clone(),
        train_size: job.size,
        seed: job.seed,
        best_mse: None,
        median_se: None,
        epoch_of_best: None,
        seconds: None,
        status: "ok".into(),
        final_mse: None,
    };
    match outcome {
        Ok(r) => {
            row.best_mse = Some(r.best_mse);
            row.median_se = Some(r.median_se());
            row.epoch_of_best = r.best_epoch;
            row.final_mse = Some(r.final_mse);
            row.seconds = wall_time.then_some(r.wall_seconds);
        }
        Err(e) => row.status = format!("error: {}", e.replace(['\n', '\r'], " ")),
    }
    row
}

/// Runs every (training size, method, architecture, seed) of the config.
/// Failed runs become rows with an `error:` status. Network grid runs are
/// reduced to one row per (architecture, seed) holding the best training
/// hyperparameters.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultsTable, HarnessError> {
    run_experiment_with(config, |_| {})
}

/// [`run_experiment`] calling `progress` with each finished row, in
/// completion order.
pub fn run_experiment_with<P>(config: &ExperimentConfig, progress: P) -> Result<ResultsTable, HarnessError>
where
    P: Fn(&ResultRow) + Sync,
{
    config.validate()?;
    let (train_full, test) = load_datasets(&config.dataset, config.seed)?;
    run_on(config, &train_full, &test, progress)
}

/// [`run_experiment_with`] on already loaded data.
pub fn run_on<P>(
    config: &ExperimentConfig,
    train_full: &SpectralDataset,
    test: &SpectralDataset,
    progress: P,
) -> Result<ResultsTable, HarnessError>
where
    P: Fn(&ResultRow) + Sync,
{
    let (rows, _) = run_rows(config, train_full, test, progress, false)?;
    Ok(ResultsTable::new(rows))
}

/// Rows in config order, each with its trained Blaschke model when
/// `keep_models` is set and the method produces one.
pub(crate) fn run_rows<P>(
    config: &ExperimentConfig,
    train_full: &SpectralDataset,
    test: &SpectralDataset,
    progress: P,
    keep_models: bool,
) -> Result<(Vec<ResultRow>, Vec<Option<BpnnModel>>), HarnessError>
where
    P: Fn(&ResultRow) + Sync,
{
    let largest = *config.train_sizes.last().expect("validated");
    if largest > train_full.len() {
        return Err(HarnessError::Config(format!(
            "training size {largest} exceeds the {} available training spectra",
            train_full.len()
        )));
    }
    let dataset = config.dataset.name();
    let jobs = jobs_for(config);
    let results = run_parallel(config.jobs, &jobs, |job| {
        let out = run_job(job, config, train_full, test);
        let (report, model) = match out {
            Ok((r, m)) => (Ok(r), m.filter(|_| keep_models)),
            Err(e) => (Err(e), None),
        };
        progress(&row_for(&dataset, job, &report, config.record_wall_time));
        (report, model)
    })?;
    let (outcomes, mut models): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    let mut rows = Vec::new();
    let mut kept = Vec::new();
    let mut i = 0;
    while i < jobs.len() {
        let job = &jobs[i];
        if !matches!(job.kind, JobKind::Fcnn(_)) {
            rows.push(row_for(&dataset, job, &outcomes[i], config.record_wall_time));
            kept.push(models[i].take());
            i += 1;
            continue;
        }
        // all hyperparameter runs of one (size, arch) are contiguous
        let mut end = i;
        while end < jobs.len()
            && matches!(jobs[end].kind, JobKind::Fcnn(_))
            && jobs[end].size == job.size
            && jobs[end].arch == job.arch
        {
            end += 1;
        }
        for seed in config.seeds(config.fcnn.seeds) {
            let group: Vec<usize> = (i..end).filter(|&k| jobs[k].seed == seed).collect();
            let best = group
                .iter()
                .filter_map(|&k| outcomes[k].as_ref().ok().map(|r| (k, r.best_mse)))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            let k = best.map(|(k, _)| k).unwrap_or(group[0]);
            rows.push(row_for(&dataset, &jobs[k], &outcomes[k], config.record_wall_time));
            kept.push(None);
        }
        i = end;
    }
    Ok((rows, kept))
}
