//! Comparison methods: Kramers-Kronig, AAA with a parameter network, MUSIC
//! with per-sample amplitude fitting, Linear+BP and plain fully-connected
//! networks.

mod aaa;
mod fcnn;
mod kk;
mod music;

pub use aaa::{aaa_fit, aaa_network_pipeline, AaaNetConfig, AaaStages, BarycentricModel};
pub use fcnn::{fcnn_baseline, fcnn_run, FcnnGrid, FcnnHparams, FcnnResult, FcnnRun};
pub use kk::{hilbert_transform, kk_phase, kk_reconstruct};
pub use music::{
    music_distance, music_frequencies, music_pipeline, music_retrieve, noise_subspace, pseudospectrum_denominator,
    steering_matrix, MusicConfig, MusicModel, RetrieveOptions,
};

use crate::blaschke::BlaschkeError;
use crate::bpnn::{median, train_bpnn, BpnnConfig, BpnnError, BpnnModel, TrainReport};
use crate::datasets::SpectralDataset;

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("magnitude at index {0} is zero or negative; its logarithm is undefined")]
    ZeroMagnitude(usize),
    #[error("frequency grid must be strictly increasing with at least 2 points")]
    Grid,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("least-squares system is degenerate (all sample values are zero)")]
    Degenerate,
    #[error("need at least {needed} distinct sample points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("model order p = {p} must be below the signal length M = {m}")]
    Order { p: usize, m: usize },
    #[error("pseudospectrum has {found} peaks, {wanted} requested")]
    TooFewPeaks { found: usize, wanted: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Bpnn(#[from] BpnnError),
    #[error(transparent)]
    Blaschke(#[from] BlaschkeError),
}

/// Outcome of one method run on a test set.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodReport {
    /// Best mean test error over recorded epochs (the only value for
    /// closed-form methods).
    pub best_mse: f64,
    /// Mean test error of the final model.
    pub final_mse: f64,
    /// 1-based epoch of `best_mse`; `None` for methods without epochs.
    pub best_epoch: Option<usize>,
    /// Per-sample squared errors behind `best_mse`.
    pub per_sample: Vec<f64>,
    pub wall_seconds: f64,
}

impl MethodReport {
    pub fn closed_form(per_sample: Vec<f64>, wall_seconds: f64) -> Self {
        let mse = mean(&per_sample);
        Self {
            best_mse: mse,
            final_mse: mse,
            best_epoch: None,
            per_sample,
            wall_seconds,
        }
    }

    pub fn median_se(&self) -> f64 {
        median(&self.per_sample)
    }
}

impl From<TrainReport> for MethodReport {
    fn from(r: TrainReport) -> Self {
        Self {
            best_mse: r.best_test_mse,
            final_mse: r.final_test_mse(),
            best_epoch: Some(r.best_epoch),
            per_sample: r.best_per_sample,
            wall_seconds: r.wall_seconds,
        }
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// BPNN with the network replaced by one affine map from magnitudes to the
/// `2m + 1` Blaschke parameters; otherwise identical training.
pub fn linear_bp(
    config: &BpnnConfig,
    train: &SpectralDataset,
    test: &SpectralDataset,
) -> Result<(TrainReport, BpnnModel), BaselineError> {
    let linear = BpnnConfig {
        hidden: Vec::new(),
        ..config.clone()
    };
    Ok(train_bpnn(&linear, train, test)?)
}

#[cfg(test)]
mod tests;
