use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::head::Head;
use super::mlp::Mlp;
use super::BpnnError;
use crate::datasets::SpectralDataset;
use crate::numerics::{AdamConfig, AdamState, Complex};

/// Magnitudes as network inputs (one column per sample) plus the complex
/// ground truth, stored sample-major.
#[derive(Debug, Clone)]
pub struct SpectraBatch {
    pub inputs: DMatrix<f64>,
    truth: Vec<Complex>,
    n_freq: usize,
}

impl SpectraBatch {
    pub fn new(n_freq: usize, magnitudes: Vec<f64>, truth: Vec<Complex>) -> Result<Self, BpnnError> {
        if n_freq == 0 || magnitudes.len() != truth.len() || !truth.len().is_multiple_of(n_freq) {
            return Err(BpnnError::Dimension {
                expected: truth.len(),
                got: magnitudes.len(),
            });
        }
        let cols = truth.len() / n_freq;
        Ok(Self {
            inputs: DMatrix::from_vec(n_freq, cols, magnitudes),
            truth,
            n_freq,
        })
    }

    pub fn from_dataset(data: &SpectralDataset) -> Self {
        let n = data.n_freq();
        let mut mags = Vec::with_capacity(n * data.len());
        let mut truth = Vec::with_capacity(n * data.len());
        for s in data.samples() {
            mags.extend_from_slice(&s.magnitudes);
            truth.extend_from_slice(&s.values);
        }
        Self {
            inputs: DMatrix::from_vec(n, data.len(), mags),
            truth,
            n_freq: n,
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_freq(&self) -> usize {
        self.n_freq
    }

    pub fn magnitudes(&self, j: usize) -> &[f64] {
        &self.inputs.as_slice()[j * self.n_freq..(j + 1) * self.n_freq]
    }

    pub fn truth(&self, j: usize) -> &[Complex] {
        &self.truth[j * self.n_freq..(j + 1) * self.n_freq]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

/// Per-epoch record of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean training loss before each epoch's update.
    pub train_loss: Vec<f64>,
    /// Mean test error after each epoch's update.
    pub test_mse: Vec<f64>,
    pub best_test_mse: f64,
    /// 1-based epoch at which `best_test_mse` was reached.
    pub best_epoch: usize,
    /// Per-sample test errors at the best epoch.
    pub best_per_sample: Vec<f64>,
    pub wall_seconds: f64,
}

impl TrainReport {
    pub fn final_test_mse(&self) -> f64 {
        *self.test_mse.last().unwrap_or(&f64::NAN)
    }

    pub fn median_at_best(&self) -> f64 {
        median(&self.best_per_sample)
    }

    /// Equality of everything except wall-clock time.
    pub fn same_trajectory(&self, other: &Self) -> bool {
        self.train_loss == other.train_loss
            && self.test_mse == other.test_mse
            && self.best_epoch == other.best_epoch
            && self.best_test_mse.to_bits() == other.best_test_mse.to_bits()
            && self.best_per_sample == other.best_per_sample
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Full-batch Adam on `head`'s loss. `test_errors` is called after every
/// update and returns per-sample test errors; the epoch with the lowest mean
/// is kept as the best.
pub fn fit_network<H, F>(
    mlp: &mut Mlp,
    head: &H,
    inputs: &DMatrix<f64>,
    target: &H::Target,
    opts: &TrainOptions,
    mut test_errors: F,
) -> Result<TrainReport, BpnnError>
where
    H: Head,
    F: FnMut(&Mlp) -> Result<Vec<f64>, BpnnError>,
{
    if opts.epochs == 0 {
        return Err(BpnnError::Config("epochs must be >= 1".into()));
    }
    if head.output_width() != mlp.output_width() {
        return Err(BpnnError::Dimension {
            expected: head.output_width(),
            got: mlp.output_width(),
        });
    }
    let start = Instant::now();
    let mut adam = AdamState::new(mlp.params().len(), AdamConfig::with_learning_rate(opts.learning_rate));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut report = TrainReport {
        train_loss: Vec::with_capacity(opts.epochs),
        test_mse: Vec::with_capacity(opts.epochs),
        best_test_mse: f64::INFINITY,
        best_epoch: 0,
        best_per_sample: Vec::new(),
        wall_seconds: 0.0,
    };
    let mut grad_out = DMatrix::zeros(mlp.output_width(), inputs.ncols());
    for epoch in 1..=opts.epochs {
        let diverged = |_| BpnnError::Diverged { epoch };
        let (out, cache) = mlp.forward_train(inputs, &mut rng)?;
        let losses = head.loss(&out, target, Some(&mut grad_out)).map_err(diverged)?;
        let train_loss = mean(&losses);
        if !train_loss.is_finite() {
            return Err(BpnnError::Diverged { epoch });
        }
        let grad = mlp.backward(&cache, &grad_out);
        adam.step(mlp.params_mut(), &grad)
            .expect("gradient and parameter lengths agree");
        if mlp.params().iter().any(|p| !p.is_finite()) {
            return Err(BpnnError::Diverged { epoch });
        }
        let errs = test_errors(mlp).map_err(diverged)?;
        let test = mean(&errs);
        if !test.is_finite() {
            return Err(BpnnError::Diverged { epoch });
        }
        report.train_loss.push(train_loss);
        report.test_mse.push(test);
        if test < report.best_test_mse {
            report.best_test_mse = test;
            report.best_epoch = epoch;
            report.best_per_sample = errs;
        }
    }
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
