use super::{BaselineError, MethodReport};
use crate::bpnn::{fit_network, DirectHead, Head, Mlp, SpectraBatch, TrainOptions};
use crate::datasets::SpectralDataset;

/// Hyperparameter grid for the plain network baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct FcnnGrid {
    pub widths: Vec<usize>,
    pub depths: Vec<usize>,
    pub dropouts: Vec<f64>,
    pub learning_rates: Vec<f64>,
    pub seeds: Vec<u64>,
    pub epochs: usize,
}

impl Default for FcnnGrid {
    fn default() -> Self {
        Self {
            widths: vec![32, 64, 128, 256],
            depths: vec![1, 2, 3, 4],
            dropouts: vec![0.0, 0.05, 0.1, 0.15, 0.2],
            learning_rates: vec![1e-4, 5e-4, 1e-3, 5e-3, 1e-2],
            seeds: vec![0, 1, 2],
            epochs: 6000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcnnHparams {
    pub width: usize,
    pub depth: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub seed: u64,
}

impl FcnnHparams {
    pub fn arch(&self) -> (usize, usize) {
        (self.width, self.depth)
    }
}

impl FcnnGrid {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.widths.is_empty()
            || self.depths.is_empty()
            || self.dropouts.is_empty()
            || self.learning_rates.is_empty()
            || self.seeds.is_empty()
        {
            return Err(BaselineError::Config("every network grid axis needs a value".into()));
        }
        if self.epochs == 0 {
            return Err(BaselineError::Config("epochs must be >= 1".into()));
        }
        Ok(())
    }

    /// `(width, depth)` pairs in grid order.
    pub fn architectures(&self) -> Vec<(usize, usize)> {
        self.widths
            .iter()
            .flat_map(|&w| self.depths.iter().map(move |&d| (w, d)))
            .collect()
    }

    /// Every run of the grid: architecture-major, then dropout, learning
    /// rate and seed.
    pub fn runs(&self) -> Vec<FcnnHparams> {
        let mut out = Vec::new();
        for (width, depth) in self.architectures() {
            for &dropout in &self.dropouts {
                for &learning_rate in &self.learning_rates {
                    for &seed in &self.seeds {
                        out.push(FcnnHparams {
                            width,
                            depth,
                            dropout,
                            learning_rate,
                            seed,
                        });
                    }
                }
            }
        }
        out
    }
}

/// One network of `depth` hidden layers of `width` units predicting the 2N
/// reals of the spectrum, trained on the complex reconstruction loss.
pub fn fcnn_run(
    hp: &FcnnHparams,
    epochs: usize,
    train: &SpectralDataset,
    test: &SpectralDataset,
) -> Result<MethodReport, BaselineError> {
    if train.omegas() != test.omegas() {
        return Err(crate::bpnn::BpnnError::GridMismatch.into());
    }
    let n = train.n_freq();
    let mut widths = vec![n];
    widths.extend(std::iter::repeat_n(hp.width, hp.depth));
    widths.push(2 * n);
    let mut mlp = Mlp::init(&widths, hp.dropout, hp.seed)?;
    let head = DirectHead::new(n);
    let train_batch = SpectraBatch::from_dataset(train);
    let test_batch = SpectraBatch::from_dataset(test);
    let opts = TrainOptions {
        epochs,
        learning_rate: hp.learning_rate,
        seed: hp.seed,
    };
    let report = fit_network(&mut mlp, &head, &train_batch.inputs, &train_batch, &opts, |m| {
        head.loss(&m.forward(&test_batch.inputs)?, &test_batch, None)
    })?;
    Ok(report.into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcnnRun {
    pub hparams: FcnnHparams,
    /// Failure message for runs that diverged or could not start.
    pub outcome: Result<MethodReport, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcnnResult {
    pub runs: Vec<FcnnRun>,
}

impl FcnnResult {
    fn best_of<'a>(runs: impl Iterator<Item = &'a FcnnRun>) -> Option<&'a FcnnRun> {
        runs.filter(|r| r.outcome.is_ok())
            .min_by(|a, b| {
                let key = |r: &FcnnRun| r.outcome.as_ref().map(|o| o.best_mse).unwrap_or(f64::INFINITY);
                key(a).total_cmp(&key(b))
            })
    }

    /// Best run per architecture, in grid order; `None` where every run failed.
    pub fn best_per_architecture(&self) -> Vec<((usize, usize), Option<&FcnnRun>)> {
        let mut archs: Vec<(usize, usize)> = Vec::new();
        for r in &self.runs {
            if !archs.contains(&r.hparams.arch()) {
                archs.push(r.hparams.arch());
            }
        }
        archs
            .into_iter()
            .map(|a| (a, Self::best_of(self.runs.iter().filter(|r| r.hparams.arch() == a))))
            .collect()
    }

    pub fn best(&self) -> Option<&FcnnRun> {
        Self::best_of(self.runs.iter())
    }
}

/// Trains every grid point; diverged runs are recorded, not fatal.
pub fn fcnn_baseline(grid: &FcnnGrid, train: &SpectralDataset, test: &SpectralDataset) -> Result<FcnnResult, BaselineError> {
    grid.validate()?;
    if train.omegas() != test.omegas() {
        return Err(crate::bpnn::BpnnError::GridMismatch.into());
    }
    let runs = grid
        .runs()
        .into_iter()
        .map(|hp| FcnnRun {
            hparams: hp,
            outcome: fcnn_run(&hp, grid.epochs, train, test).map_err(|e| e.to_string()),
        })
        .collect();
    Ok(FcnnResult { runs })
}
