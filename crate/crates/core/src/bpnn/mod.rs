//! Blaschke product networks.
//!
//! A fully-connected network maps the magnitude spectrum `|f(jω_i)|` to
//! `S` blocks of `[Re a_1, Im a_1, …, Re a_m, Im a_m, φ]`, one block per
//! frequency segment. Each block defines a unimodular phase model on its
//! segment and the prediction is `|f(jω_i)| · b̃(jω_i)`, so magnitudes are
//! reproduced exactly and training only has to learn the phase.

mod checkpoint;
mod head;
mod mlp;
mod tape_route;
mod train;

pub use checkpoint::{Checkpoint, CheckpointError};
pub use head::{BlaschkeHead, DirectHead, Head};
pub use mlp::{ForwardCache, Mlp};
pub use tape_route::record_bpnn_loss;
pub use train::{fit_network, median, SpectraBatch, TrainOptions, TrainReport};

use crate::blaschke::{BlaschkeError, GridPartition};
use crate::datasets::SpectralDataset;
use crate::numerics::Complex;

#[derive(Debug, thiserror::Error)]
pub enum BpnnError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("train and test sets use different frequency grids")]
    GridMismatch,
    #[error(transparent)]
    Blaschke(#[from] BlaschkeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpnnConfig {
    pub roots_per_segment: usize,
    pub segments: usize,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for BpnnConfig {
    /// Four roots, one segment, two hidden layers of 64, no dropout,
    /// 6000 epochs.
    fn default() -> Self {
        Self {
            roots_per_segment: 4,
            segments: 1,
            hidden: vec![64, 64],
            dropout: 0.0,
            learning_rate: 1e-3,
            epochs: 6000,
            seed: 0,
        }
    }
}

impl BpnnConfig {
    pub fn validate(&self) -> Result<(), BpnnError> {
        if self.roots_per_segment == 0 {
            return Err(BpnnError::Config("roots per segment must be >= 1".into()));
        }
        if self.segments == 0 {
            return Err(BpnnError::Config("segments must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(BpnnError::Config("epochs must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(BpnnError::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(BpnnError::Config("learning rate must be positive".into()));
        }
        if self.hidden.contains(&0) {
            return Err(BpnnError::Config("hidden widths must be positive".into()));
        }
        Ok(())
    }

    /// Reals produced per segment: `2m + 1`.
    pub fn block_len(&self) -> usize {
        2 * self.roots_per_segment + 1
    }

    pub fn output_width(&self) -> usize {
        self.segments * self.block_len()
    }

    pub fn widths(&self, n_freq: usize) -> Vec<usize> {
        let mut w = vec![n_freq];
        w.extend(&self.hidden);
        w.push(self.output_width());
        w
    }
}

/// A network together with the frequency partition its outputs refer to.
#[derive(Debug, Clone)]
pub struct BpnnModel {
    pub mlp: Mlp,
    pub config: BpnnConfig,
    pub partition: GridPartition,
}

impl BpnnModel {
    pub fn new(config: BpnnConfig, omegas: Vec<f64>) -> Result<Self, BpnnError> {
        config.validate()?;
        let partition = GridPartition::new(omegas, config.segments)?;
        let mlp = Mlp::init(&config.widths(partition.omegas().len()), config.dropout, config.seed)?;
        Ok(Self {
            mlp,
            config,
            partition,
        })
    }

    pub fn head(&self) -> BlaschkeHead {
        BlaschkeHead::new(self.partition.clone(), self.config.roots_per_segment)
    }

    pub fn predict(&self, magnitudes: &[f64]) -> Result<Vec<Complex>, BpnnError> {
        bpnn_forward(&self.mlp, &self.partition, magnitudes, &self.config)
    }
}

/// Network output → per-segment Blaschke models → phases → `|f|·b̃`.
pub fn bpnn_forward(
    mlp: &Mlp,
    partition: &GridPartition,
    magnitudes: &[f64],
    config: &BpnnConfig,
) -> Result<Vec<Complex>, BpnnError> {
    let n = partition.omegas().len();
    if magnitudes.len() != n || mlp.input_width() != n {
        return Err(BpnnError::Dimension {
            expected: mlp.input_width(),
            got: magnitudes.len(),
        });
    }
    if mlp.output_width() != config.output_width() {
        return Err(BpnnError::Dimension {
            expected: config.output_width(),
            got: mlp.output_width(),
        });
    }
    let x = nalgebra::DMatrix::from_column_slice(n, 1, magnitudes);
    let out = mlp.forward(&x)?;
    let model = partition.segmented_model(out.as_slice(), config.roots_per_segment)?;
    let phase = model.eval_phase_segmented(partition.omegas())?;
    Ok(crate::blaschke::reconstruct(magnitudes, &phase)?)
}

/// `(1/N) Σ |f_i − f̃_i|²`.
pub fn bpnn_loss(predicted: &[Complex], truth: &[Complex]) -> Result<f64, BpnnError> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(BpnnError::Dimension {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    Ok(predicted
        .iter()
        .zip(truth)
        .map(|(p, t)| (t - p).norm_sqr())
        .sum::<f64>()
        / truth.len() as f64)
}

/// Mean of [`bpnn_loss`] over a batch of samples.
pub fn bpnn_batch_loss(predicted: &[Vec<Complex>], truth: &[Vec<Complex>]) -> Result<f64, BpnnError> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(BpnnError::Dimension {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    let mut total = 0.0;
    for (p, t) in predicted.iter().zip(truth) {
        total += bpnn_loss(p, t)?;
    }
    Ok(total / truth.len() as f64)
}

/// Full-batch Adam training of a (piecewise) BPNN with test evaluation after
/// every epoch.
pub fn train_bpnn(
    config: &BpnnConfig,
    train: &SpectralDataset,
    test: &SpectralDataset,
) -> Result<(TrainReport, BpnnModel), BpnnError> {
    if train.omegas() != test.omegas() {
        return Err(BpnnError::GridMismatch);
    }
    let mut model = BpnnModel::new(config.clone(), train.omegas().to_vec())?;
    let head = model.head();
    let train_batch = SpectraBatch::from_dataset(train);
    let test_batch = SpectraBatch::from_dataset(test);
    let opts = TrainOptions {
        epochs: config.epochs,
        learning_rate: config.learning_rate,
        seed: config.seed,
    };
    let report = fit_network(&mut model.mlp, &head, &train_batch.inputs, &train_batch, &opts, |mlp| {
        head.per_sample_errors(&mlp.forward(&test_batch.inputs)?, &test_batch)
    })?;
    Ok((report, model))
}
