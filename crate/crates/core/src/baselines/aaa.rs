use std::time::Instant;

use nalgebra::DMatrix;

use super::{BaselineError, MethodReport};
use crate::blaschke::FrequencyMap;
use crate::bpnn::{fit_network, Head, Mlp, TrainOptions};
use crate::datasets::SpectralDataset;
use crate::numerics::Complex;

/// `r(z) = Σ w_j f_j/(z − z_j) / Σ w_j/(z − z_j)`.
///
/// Terms with zero weight are ignored; they only pad a model to a fixed
/// number of supports.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricModel {
    support: Vec<Complex>,
    weights: Vec<Complex>,
    values: Vec<Complex>,
}

impl BarycentricModel {
    pub fn new(support: Vec<Complex>, weights: Vec<Complex>, values: Vec<Complex>) -> Result<Self, BaselineError> {
        let model = Self::from_parts(support, weights, values)?;
        for (i, z) in model.support.iter().enumerate() {
            if model.support[..i].contains(z) {
                return Err(BaselineError::Config(format!("support point {z} repeated")));
            }
        }
        Ok(model)
    }

    fn from_parts(support: Vec<Complex>, weights: Vec<Complex>, values: Vec<Complex>) -> Result<Self, BaselineError> {
        let m = support.len();
        if m == 0 {
            return Err(BaselineError::Config("barycentric model needs a support point".into()));
        }
        for len in [weights.len(), values.len()] {
            if len != m {
                return Err(BaselineError::LengthMismatch { expected: m, got: len });
            }
        }
        Ok(Self {
            support,
            weights,
            values,
        })
    }

    /// Inverse of [`BarycentricModel::to_flat`]. Support points are not
    /// required to be distinct, since network predictions are arbitrary.
    pub fn from_flat(params: &[f64]) -> Result<Self, BaselineError> {
        if params.is_empty() || !params.len().is_multiple_of(6) {
            return Err(BaselineError::LengthMismatch {
                expected: 6 * (params.len() / 6).max(1),
                got: params.len(),
            });
        }
        let c = |i: usize| Complex::new(params[i], params[i + 1]);
        let m = params.len() / 6;
        Self::from_parts(
            (0..m).map(|j| c(6 * j)).collect(),
            (0..m).map(|j| c(6 * j + 2)).collect(),
            (0..m).map(|j| c(6 * j + 4)).collect(),
        )
    }

    /// `[Re z_j, Im z_j, Re w_j, Im w_j, Re f_j, Im f_j]` per support.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(6 * self.len());
        for j in 0..self.len() {
            for c in [self.support[j], self.weights[j], self.values[j]] {
                out.extend([c.re, c.im]);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[Complex] {
        &self.support
    }

    pub fn weights(&self) -> &[Complex] {
        &self.weights
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn eval(&self, z: Complex) -> Complex {
        let mut num = Complex::new(0.0, 0.0);
        let mut den = Complex::new(0.0, 0.0);
        for ((&zj, &wj), &fj) in self.support.iter().zip(&self.weights).zip(&self.values) {
            if wj == Complex::new(0.0, 0.0) {
                continue;
            }
            if z == zj {
                return fj;
            }
            let c = wj / (z - zj);
            num += c * fj;
            den += c;
        }
        num / den
    }
}

fn distinct_count(points: &[Complex]) -> usize {
    let mut v: Vec<(f64, f64)> = points.iter().map(|z| (z.re, z.im)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    v.dedup();
    v.len()
}

/// Greedy AAA: each step adds the sample of largest residual as a support
/// point and takes the weights as the right singular vector of the smallest
/// singular value of the Loewner matrix. Stops once the maximum residual is
/// at most `tol · max|F|` or `max_m` supports are in use.
pub fn aaa_fit(points: &[Complex], values: &[Complex], max_m: usize, tol: f64) -> Result<BarycentricModel, BaselineError> {
    if points.len() != values.len() {
        return Err(BaselineError::LengthMismatch {
            expected: points.len(),
            got: values.len(),
        });
    }
    if max_m == 0 {
        return Err(BaselineError::Config("max_m must be >= 1".into()));
    }
    let distinct = distinct_count(points);
    if distinct < max_m + 1 {
        return Err(BaselineError::TooFewPoints {
            needed: max_m + 1,
            got: distinct,
        });
    }
    if points.iter().chain(values).any(|z| !z.is_finite()) {
        return Err(BaselineError::Config("non-finite sample".into()));
    }
    let scale = values.iter().map(|f| f.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(BaselineError::Degenerate);
    }
    let n = points.len();
    let mean = values.iter().sum::<Complex>() / n as f64;
    let mut approx = vec![mean; n];
    let mut chosen: Vec<usize> = Vec::new();
    let mut is_support = vec![false; n];
    let mut weights: Vec<Complex>;
    loop {
        let next = (0..n)
            .filter(|&i| !is_support[i])
            .max_by(|&a, &b| {
                (values[a] - approx[a])
                    .norm()
                    .total_cmp(&(values[b] - approx[b]).norm())
                    .then(b.cmp(&a))
            })
            .expect("more samples than supports");
        chosen.push(next);
        // duplicates of a support point are settled along with it
        for i in 0..n {
            if points[i] == points[next] {
                is_support[i] = true;
            }
        }
        let rest: Vec<usize> = (0..n).filter(|&i| !is_support[i]).collect();
        let m = chosen.len();
        let rows = rest.len().max(m);
        let mut loewner = DMatrix::<Complex>::zeros(rows, m);
        for (r, &i) in rest.iter().enumerate() {
            for (c, &j) in chosen.iter().enumerate() {
                loewner[(r, c)] = (values[i] - values[j]) / (points[i] - points[j]);
            }
        }
        let svd = loewner.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let k = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .expect("nonempty");
        weights = (0..m).map(|j| v_t[(k, j)].conj()).collect();
        let model = BarycentricModel::from_parts(
            chosen.iter().map(|&j| points[j]).collect(),
            weights.clone(),
            chosen.iter().map(|&j| values[j]).collect(),
        )?;
        let mut err: f64 = 0.0;
        for i in 0..n {
            approx[i] = if is_support[i] { values[i] } else { model.eval(points[i]) };
            err = err.max((values[i] - approx[i]).norm());
        }
        if err <= tol * scale || m == max_m || rest.is_empty() {
            break;
        }
    }
    BarycentricModel::new(
        chosen.iter().map(|&j| points[j]).collect(),
        weights,
        chosen.iter().map(|&j| values[j]).collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct AaaNetConfig {
    /// Support points per spectrum; four matches the default BPNN root count.
    pub max_m: usize,
    pub tol: f64,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for AaaNetConfig {
    fn default() -> Self {
        Self {
            max_m: 4,
            tol: 1e-13,
            hidden: vec![64, 64],
            epochs: 300,
            learning_rate: 1e-3,
            seed: 0,
        }
    }
}

/// The three stages of the AAA-network baseline, exposed separately so each
/// can be checked on its own.
///
/// Phases are fitted as functions of `z = jω̂`, with `ω̂` the band mapped onto
/// `[−1, 1]`; a spectrum is reconstructed as `|f(jω_i)| · r(jω̂_i)`.
#[derive(Debug, Clone)]
pub struct AaaStages {
    points: Vec<Complex>,
    max_m: usize,
    tol: f64,
}

impl AaaStages {
    pub fn new(omegas: &[f64], max_m: usize, tol: f64) -> Result<Self, BaselineError> {
        let (lo, hi) = match omegas {
            [first, .., last] => (*first, *last),
            _ => return Err(BaselineError::Grid),
        };
        let map = FrequencyMap::spanning(lo, hi)?;
        Ok(Self {
            points: omegas.iter().map(|&w| Complex::new(0.0, map.normalize(w))).collect(),
            max_m,
            tol,
        })
    }

    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    /// Stage 1: AAA fit of the unit phase `f/|f|` of one spectrum, padded
    /// with zero-weight supports to exactly `max_m` terms.
    pub fn fit(&self, values: &[Complex]) -> Result<BarycentricModel, BaselineError> {
        let phase: Vec<Complex> = values
            .iter()
            .map(|f| if f.norm() > 0.0 { f / f.norm() } else { Complex::new(1.0, 0.0) })
            .collect();
        let model = aaa_fit(&self.points, &phase, self.max_m, self.tol)?;
        let (mut z, mut w, mut f) = (model.support.clone(), model.weights.clone(), model.values.clone());
        for (p, v) in self.points.iter().zip(&phase) {
            if z.len() == self.max_m {
                break;
            }
            if !z.contains(p) {
                z.push(*p);
                w.push(Complex::new(0.0, 0.0));
                f.push(*v);
            }
        }
        BarycentricModel::new(z, w, f)
    }

    /// Stage 3: `|f| · r(z_i)`.
    pub fn reconstruct(&self, model: &BarycentricModel, magnitudes: &[f64]) -> Vec<Complex> {
        self.points
            .iter()
            .zip(magnitudes)
            .map(|(&z, &a)| model.eval(z) * a)
            .collect()
    }

    /// `(1/N) Σ |f_i − f̃_i|²` of a reconstruction.
    pub fn error(&self, model: &BarycentricModel, magnitudes: &[f64], truth: &[Complex]) -> f64 {
        let pred = self.reconstruct(model, magnitudes);
        pred.iter().zip(truth).map(|(p, t)| (p - t).norm_sqr()).sum::<f64>() / truth.len() as f64
    }
}

/// Mean squared error over network outputs.
struct RegressionHead {
    width: usize,
}

impl Head for RegressionHead {
    type Target = DMatrix<f64>;

    fn output_width(&self) -> usize {
        self.width
    }

    fn loss(
        &self,
        out: &DMatrix<f64>,
        target: &DMatrix<f64>,
        grad: Option<&mut DMatrix<f64>>,
    ) -> Result<Vec<f64>, crate::bpnn::BpnnError> {
        if out.shape() != target.shape() {
            return Err(crate::bpnn::BpnnError::Dimension {
                expected: target.len(),
                got: out.len(),
            });
        }
        let diff = out - target;
        let k = self.width as f64;
        if let Some(g) = grad {
            *g = &diff * (2.0 / (k * out.ncols() as f64));
        }
        Ok(diff.column_iter().map(|c| c.norm_squared() / k).collect())
    }
}

/// AAA fits on the training phases, a network from magnitudes to the
/// flattened barycentric parameters, and reconstruction of the test set from
/// predicted parameters. The network is trained for `epochs` full-batch Adam
/// steps on the parameter regression loss and the final network is used.
pub fn aaa_network_pipeline(
    config: &AaaNetConfig,
    train: &SpectralDataset,
    test: &SpectralDataset,
) -> Result<MethodReport, BaselineError> {
    if train.omegas() != test.omegas() {
        return Err(crate::bpnn::BpnnError::GridMismatch.into());
    }
    if config.epochs == 0 {
        return Err(BaselineError::Config("epochs must be >= 1".into()));
    }
    let start = Instant::now();
    let stages = AaaStages::new(train.omegas(), config.max_m, config.tol)?;
    let n = train.n_freq();
    let width = 6 * config.max_m;
    let mut target = DMatrix::zeros(width, train.len());
    let mut inputs = DMatrix::zeros(n, train.len());
    for (j, s) in train.samples().iter().enumerate() {
        let model = stages.fit(&s.values)?;
        target.column_mut(j).copy_from_slice(&model.to_flat());
        inputs.column_mut(j).copy_from_slice(&s.magnitudes);
    }
    let mut widths = vec![n];
    widths.extend(&config.hidden);
    widths.push(width);
    let mut mlp = Mlp::init(&widths, 0.0, config.seed)?;
    let head = RegressionHead { width };
    let opts = TrainOptions {
        epochs: config.epochs,
        learning_rate: config.learning_rate,
        seed: config.seed,
    };
    let train_fit = |m: &Mlp| head.loss(&m.forward(&inputs)?, &target, None);
    fit_network(&mut mlp, &head, &inputs, &target, &opts, train_fit)?;

    let mut test_inputs = DMatrix::zeros(n, test.len());
    for (j, s) in test.samples().iter().enumerate() {
        test_inputs.column_mut(j).copy_from_slice(&s.magnitudes);
    }
    let predicted = mlp.forward(&test_inputs)?;
    let per_sample = test
        .samples()
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let model = BarycentricModel::from_flat(predicted.column(j).as_slice())?;
            Ok(stages.error(&model, &s.magnitudes, &s.values))
        })
        .collect::<Result<Vec<_>, BaselineError>>()?;
    Ok(MethodReport::closed_form(per_sample, start.elapsed().as_secs_f64()))
}
