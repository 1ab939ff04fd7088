use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use super::{BaselineError, MethodReport};
use crate::datasets::SpectralDataset;
use crate::numerics::{AdamConfig, AdamState, Complex};

/// Vandermonde matrix `A[k, i] = e^{j k w_i}`, `k = 0..m`.
pub fn steering_matrix(frequencies: &[f64], m: usize) -> DMatrix<Complex> {
    DMatrix::from_fn(m, frequencies.len(), |k, i| Complex::from_polar(1.0, k as f64 * frequencies[i]))
}

/// Eigenvectors of `R̂ = (1/N) Σ x xᴴ` belonging to the `M − p` smallest
/// eigenvalues, as columns. `signals` holds one length-`M` signal per row.
pub fn noise_subspace(signals: &DMatrix<Complex>, p: usize) -> Result<DMatrix<Complex>, BaselineError> {
    let (n, m) = signals.shape();
    if p >= m {
        return Err(BaselineError::Order { p, m });
    }
    if n == 0 {
        return Err(BaselineError::Config("no signals".into()));
    }
    // rows are xᵀ, so Σ x xᴴ = Xᵀ conj(X)
    let r = signals.transpose() * signals.map(|z| z.conj()) / Complex::new(n as f64, 0.0);
    let r = (&r + r.adjoint()) * Complex::new(0.5, 0.0);
    let eig = r.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let cols: Vec<_> = order[..m - p].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    Ok(DMatrix::from_columns(&cols))
}

/// `d²(w) = Σ_i |e(w)ᴴ v_i|²` with `e(w)_k = e^{jkw}`.
pub fn music_distance(noise: &DMatrix<Complex>, w: f64) -> f64 {
    let e = steering_matrix(&[w], noise.nrows());
    (e.adjoint() * noise).iter().map(|z| z.norm_sqr()).sum()
}

/// `d²` on the grid `w_g = 2πg/G`, one zero-padded FFT per noise vector.
pub fn pseudospectrum_denominator(noise: &DMatrix<Complex>, grid_size: usize) -> Result<Vec<f64>, BaselineError> {
    if grid_size < noise.nrows() {
        return Err(BaselineError::Config(format!(
            "grid of {grid_size} points is coarser than the signal length {}",
            noise.nrows()
        )));
    }
    let fft = FftPlanner::new().plan_fft_forward(grid_size);
    let mut d2 = vec![0.0; grid_size];
    let mut buf = vec![Complex::new(0.0, 0.0); grid_size];
    for v in noise.column_iter() {
        buf.fill(Complex::new(0.0, 0.0));
        buf[..v.len()].copy_from_slice(v.as_slice());
        fft.process(&mut buf);
        for (d, z) in d2.iter_mut().zip(&buf) {
            *d += z.norm_sqr();
        }
    }
    Ok(d2)
}

/// Circular local minima of `d` (peaks of `1/d`). A plateau counts once, at
/// its lowest index. Sorted by depth, ties by index.
pub(super) fn peaks(d: &[f64]) -> Vec<usize> {
    let g = d.len();
    let mut found = Vec::new();
    for i in 0..g {
        let prev = d[(i + g - 1) % g];
        if !(d[i] < prev) {
            continue;
        }
        let mut k = 1;
        while k < g && d[(i + k) % g] == d[i] {
            k += 1;
        }
        if k < g && d[(i + k) % g] > d[i] {
            found.push(i);
        }
    }
    found.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    found
}

/// Frequencies of the `p` highest pseudospectrum peaks on a uniform grid of
/// `grid_size` points over `[0, 2π)`, in descending peak height.
pub fn music_frequencies(signals: &DMatrix<Complex>, p: usize, grid_size: usize) -> Result<Vec<f64>, BaselineError> {
    let noise = noise_subspace(signals, p)?;
    let d2 = pseudospectrum_denominator(&noise, grid_size)?;
    let top = peaks(&d2);
    if top.len() < p {
        return Err(BaselineError::TooFewPeaks {
            found: top.len(),
            wanted: p,
        });
    }
    Ok(top[..p]
        .iter()
        .map(|&g| std::f64::consts::TAU * g as f64 / grid_size as f64)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrieveOptions {
    pub restarts: usize,
    pub epochs: usize,
    /// Initial Adam step relative to the amplitude scale of the target.
    pub learning_rate: f64,
    /// Ratio of the last to the first step size; decay is geometric.
    pub final_lr_ratio: f64,
    pub seed: u64,
}

impl Default for RetrieveOptions {
    fn default() -> Self {
        Self {
            restarts: 1024,
            epochs: 300,
            learning_rate: 0.1,
            final_lr_ratio: 1e-4,
            seed: 0,
        }
    }
}

/// Amplitudes `s` minimizing `‖|As| − y‖²` by Adam from `restarts` random
/// starts. Returns `A s` for the best restart and its loss.
///
/// All restarts advance together as the columns of one `p × R` matrix; Adam
/// acts elementwise, so this equals running them one by one.
pub fn music_retrieve(
    a: &DMatrix<Complex>,
    target: &[f64],
    opts: &RetrieveOptions,
) -> Result<(Vec<Complex>, f64), BaselineError> {
    let (m, p) = a.shape();
    if target.len() != m {
        return Err(BaselineError::LengthMismatch {
            expected: m,
            got: target.len(),
        });
    }
    if opts.restarts == 0 || p == 0 {
        return Err(BaselineError::Config("need at least one restart and one column".into()));
    }
    let r = opts.restarts;
    let rms = (target.iter().map(|y| y * y).sum::<f64>() / m as f64).sqrt();
    let scale = if rms > 0.0 { rms / (p as f64).sqrt() } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut s = DMatrix::from_fn(p, r, |_, _| {
        Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
    });
    let loss_of = |x: &DMatrix<Complex>| -> Vec<f64> {
        x.column_iter()
            .map(|c| c.iter().zip(target).map(|(z, y)| (z.norm() - y).powi(2)).sum())
            .collect()
    };
    let mut best_loss = vec![f64::INFINITY; r];
    let mut best_s = s.clone();
    let mut adam = AdamState::new(2 * p * r, AdamConfig::with_learning_rate(opts.learning_rate * scale));
    let mut flat = vec![0.0; 2 * p * r];
    let mut grad = vec![0.0; 2 * p * r];
    let ah = a.adjoint();
    let epochs = opts.epochs;
    for epoch in 0..=epochs {
        let x = a * &s;
        let losses = loss_of(&x);
        for (j, &l) in losses.iter().enumerate() {
            if l < best_loss[j] {
                best_loss[j] = l;
                best_s.set_column(j, &s.column(j));
            }
        }
        if epoch == epochs {
            break;
        }
        // ∂L/∂s = Aᴴ g with g_i = 2 (|x_i| − y_i) x_i/|x_i|
        let g = DMatrix::from_fn(m, r, |i, j| {
            let z = x[(i, j)];
            let n = z.norm();
            if n > 0.0 {
                z * (2.0 * (n - target[i]) / n)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let gs = &ah * g;
        for (k, (z, dz)) in s.iter().zip(gs.iter()).enumerate() {
            flat[2 * k] = z.re;
            flat[2 * k + 1] = z.im;
            grad[2 * k] = dz.re;
            grad[2 * k + 1] = dz.im;
        }
        let frac = epoch as f64 / epochs.max(1) as f64;
        adam.config.learning_rate = opts.learning_rate * scale * opts.final_lr_ratio.powf(frac);
        adam.step(&mut flat, &grad).expect("lengths agree");
        for (k, z) in s.iter_mut().enumerate() {
            *z = Complex::new(flat[2 * k], flat[2 * k + 1]);
        }
    }
    let (j, &loss) = best_loss
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("restarts >= 1");
    let x = a * best_s.column(j);
    Ok((x.iter().copied().collect(), loss))
}

/// Estimated frequencies and the steering matrix built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct MusicModel {
    pub frequencies: Vec<f64>,
    pub steering: DMatrix<Complex>,
}

impl MusicModel {
    /// Frequencies from the training spectra, treating grid index `k` as the
    /// exponent of `e^{jkw}`.
    pub fn fit(train: &SpectralDataset, p: usize, grid_factor: usize) -> Result<Self, BaselineError> {
        let m = train.n_freq();
        let signals = DMatrix::from_fn(train.len(), m, |i, k| train.samples()[i].values[k]);
        let frequencies = music_frequencies(&signals, p, grid_factor.max(1) * m)?;
        Ok(Self {
            steering: steering_matrix(&frequencies, m),
            frequencies,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MusicConfig {
    pub p: usize,
    /// Pseudospectrum grid size as a multiple of the signal length.
    pub grid_factor: usize,
    pub retrieve: RetrieveOptions,
    /// Evaluate only the first `test_cap` test spectra.
    pub test_cap: Option<usize>,
}

impl Default for MusicConfig {
    fn default() -> Self {
        Self {
            p: 4,
            grid_factor: 10,
            retrieve: RetrieveOptions::default(),
            test_cap: None,
        }
    }
}

/// MUSIC frequencies from the training spectra, then amplitude retrieval
/// against each test magnitude.
pub fn music_pipeline(
    config: &MusicConfig,
    train: &SpectralDataset,
    test: &SpectralDataset,
) -> Result<MethodReport, BaselineError> {
    if train.omegas() != test.omegas() {
        return Err(crate::bpnn::BpnnError::GridMismatch.into());
    }
    let start = Instant::now();
    let model = MusicModel::fit(train, config.p, config.grid_factor)?;
    let count = config.test_cap.unwrap_or(test.len()).min(test.len());
    let per_sample = test.samples()[..count]
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let opts = RetrieveOptions {
                seed: config.retrieve.seed.wrapping_add(i as u64),
                ..config.retrieve
            };
            let (x, _) = music_retrieve(&model.steering, &s.magnitudes, &opts)?;
            Ok(x.iter().zip(&s.values).map(|(p, t)| (p - t).norm_sqr()).sum::<f64>() / x.len() as f64)
        })
        .collect::<Result<Vec<_>, BaselineError>>()?;
    Ok(MethodReport::closed_form(per_sample, start.elapsed().as_secs_f64()))
}
