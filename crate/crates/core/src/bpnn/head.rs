//! Output heads: turn raw network outputs into per-sample losses and the
//! gradient of their batch mean.

use nalgebra::DMatrix;

use super::train::SpectraBatch;
use super::BpnnError;
use crate::blaschke::{BlaschkePhaseModel, GridPartition};
use crate::numerics::Complex;

pub trait Head {
    type Target;

    fn output_width(&self) -> usize;

    /// Per-sample losses for the columns of `out`. When `grad` is given it is
    /// overwritten with the gradient of the mean loss with respect to `out`.
    fn loss(
        &self,
        out: &DMatrix<f64>,
        target: &Self::Target,
        grad: Option<&mut DMatrix<f64>>,
    ) -> Result<Vec<f64>, BpnnError>;
}

fn check_shape(out: &DMatrix<f64>, rows: usize, cols: usize) -> Result<(), BpnnError> {
    if out.nrows() != rows {
        return Err(BpnnError::Dimension {
            expected: rows,
            got: out.nrows(),
        });
    }
    if out.ncols() != cols {
        return Err(BpnnError::Dimension {
            expected: cols,
            got: out.ncols(),
        });
    }
    Ok(())
}

/// Piecewise Blaschke phase head with the complex reconstruction loss.
#[derive(Debug, Clone)]
pub struct BlaschkeHead {
    partition: GridPartition,
    roots: usize,
    normalized: Vec<f64>,
}

impl BlaschkeHead {
    pub fn new(partition: GridPartition, roots_per_segment: usize) -> Self {
        let mut normalized = Vec::with_capacity(partition.omegas().len());
        for (s, range) in partition.ranges().iter().enumerate() {
            let map = partition.map(s);
            normalized.extend(partition.omegas()[range.clone()].iter().map(|&w| map.normalize(w)));
        }
        Self {
            partition,
            roots: roots_per_segment,
            normalized,
        }
    }

    pub fn partition(&self) -> &GridPartition {
        &self.partition
    }

    pub fn per_sample_errors(&self, out: &DMatrix<f64>, batch: &SpectraBatch) -> Result<Vec<f64>, BpnnError> {
        self.loss(out, batch, None)
    }

    /// Reconstructed spectra for every column of `out`.
    pub fn predict(&self, out: &DMatrix<f64>, batch: &SpectraBatch) -> Result<Vec<Vec<Complex>>, BpnnError> {
        check_shape(out, self.output_width(), batch.len())?;
        let w = self.output_width();
        (0..batch.len())
            .map(|j| {
                let model = self
                    .partition
                    .segmented_model(&out.as_slice()[j * w..(j + 1) * w], self.roots)?;
                let phase = model.eval_phase_segmented(self.partition.omegas())?;
                Ok(crate::blaschke::reconstruct(batch.magnitudes(j), &phase)?)
            })
            .collect()
    }
}

impl Head for BlaschkeHead {
    type Target = SpectraBatch;

    fn output_width(&self) -> usize {
        self.partition.segments() * (2 * self.roots + 1)
    }

    fn loss(
        &self,
        out: &DMatrix<f64>,
        batch: &SpectraBatch,
        mut grad: Option<&mut DMatrix<f64>>,
    ) -> Result<Vec<f64>, BpnnError> {
        let width = self.output_width();
        check_shape(out, width, batch.len())?;
        let block = 2 * self.roots + 1;
        let omegas = self.partition.omegas();
        let n = omegas.len() as f64;
        let scale = 2.0 / (n * batch.len() as f64);
        if let Some(g) = grad.as_deref_mut() {
            check_shape(g, width, batch.len())?;
            g.fill(0.0);
        }
        let mut dtheta = vec![0.0; block];
        let mut losses = Vec::with_capacity(batch.len());
        for j in 0..batch.len() {
            let params = &out.as_slice()[j * width..(j + 1) * width];
            let mags = batch.magnitudes(j);
            let truth = batch.truth(j);
            let mut total = 0.0;
            for (s, range) in self.partition.ranges().iter().enumerate() {
                let model = BlaschkePhaseModel::from_flat(&params[s * block..(s + 1) * block], self.partition.map(s))?;
                if grad.is_none() {
                    total += segment_error(
                        &model,
                        &omegas[range.clone()],
                        &self.normalized[range.clone()],
                        &mags[range.clone()],
                        &truth[range.clone()],
                    )?;
                    continue;
                }
                let mut acc = vec![0.0; block];
                for i in range.clone() {
                    let b = model.phase_with_angle_gradient(omegas[i], &mut dtheta)?;
                    let pred = b * mags[i];
                    let r = pred - truth[i];
                    total += r.norm_sqr();
                    // ∂|r|²/∂θ = 2 Re(conj(r) · j·pred)
                    let dl = r.im * pred.re - r.re * pred.im;
                    for (a, d) in acc.iter_mut().zip(&dtheta) {
                        *a += dl * d;
                    }
                }
                if let Some(g) = grad.as_deref_mut() {
                    let col = &mut g.as_mut_slice()[j * width + s * block..j * width + (s + 1) * block];
                    for (c, a) in col.iter_mut().zip(&acc) {
                        *c = a * scale;
                    }
                }
            }
            losses.push(total / n);
        }
        Ok(losses)
    }
}

/// `Σ |f_i − |f_i|·b̃(ω̂_i)|²` over one segment, given normalized frequencies.
fn segment_error(
    model: &BlaschkePhaseModel,
    omegas: &[f64],
    normalized: &[f64],
    mags: &[f64],
    truth: &[Complex],
) -> Result<f64, BpnnError> {
    let roots = model.roots();
    let rotor = Complex::from_polar(1.0, model.phase_angle());
    let mut total = 0.0;
    for (i, &w) in normalized.iter().enumerate() {
        let (a, f) = (mags[i], truth[i]);
        let mut p = Complex::new(1.0, 0.0);
        for (k, r) in roots.iter().enumerate() {
            p *= Complex::new(-r.re, w - r.im);
            if k % 16 == 15 {
                p /= p.norm();
            }
        }
        let d = p.norm_sqr();
        let b = if d > 0.0 && d.is_finite() {
            let inv = a / d;
            rotor * Complex::new((p.re * p.re - p.im * p.im) * inv, 2.0 * p.re * p.im * inv)
        } else {
            model.phase_at(omegas[i])? * a
        };
        total += (b - f).norm_sqr();
    }
    Ok(total)
}

/// Plain network head: outputs are the `2N` reals of the predicted spectrum,
/// interleaved `[Re f̃_1, Im f̃_1, …]`.
#[derive(Debug, Clone, Copy)]
pub struct DirectHead {
    n_freq: usize,
}

impl DirectHead {
    pub fn new(n_freq: usize) -> Self {
        Self { n_freq }
    }

    pub fn predict(&self, out: &DMatrix<f64>) -> Vec<Vec<Complex>> {
        out.as_slice()
            .chunks_exact(2 * self.n_freq)
            .map(|c| c.chunks_exact(2).map(|p| Complex::new(p[0], p[1])).collect())
            .collect()
    }
}

impl Head for DirectHead {
    type Target = SpectraBatch;

    fn output_width(&self) -> usize {
        2 * self.n_freq
    }

    fn loss(
        &self,
        out: &DMatrix<f64>,
        batch: &SpectraBatch,
        mut grad: Option<&mut DMatrix<f64>>,
    ) -> Result<Vec<f64>, BpnnError> {
        let width = self.output_width();
        check_shape(out, width, batch.len())?;
        if let Some(g) = grad.as_deref() {
            check_shape(g, width, batch.len())?;
        }
        let n = self.n_freq as f64;
        let scale = 2.0 / (n * batch.len() as f64);
        let mut losses = Vec::with_capacity(batch.len());
        for j in 0..batch.len() {
            let o = &out.as_slice()[j * width..(j + 1) * width];
            let truth = batch.truth(j);
            let mut total = 0.0;
            for (i, t) in truth.iter().enumerate() {
                let dr = o[2 * i] - t.re;
                let di = o[2 * i + 1] - t.im;
                total += dr * dr + di * di;
                if let Some(g) = grad.as_deref_mut() {
                    let gs = g.as_mut_slice();
                    gs[j * width + 2 * i] = dr * scale;
                    gs[j * width + 2 * i + 1] = di * scale;
                }
            }
            losses.push(total / n);
        }
        Ok(losses)
    }
}
