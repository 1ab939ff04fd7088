//! Fully-connected ReLU network over column batches.

use nalgebra::{DMatrix, DMatrixView};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BpnnError;

/// Weights and biases of a ReLU MLP stored as one flat vector.
///
/// Layer `l` maps width `widths[l]` to `widths[l+1]`; its block in `params`
/// is the weight matrix (`out × in`, column-major) followed by the bias.
/// The output layer has no activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    widths: Vec<usize>,
    params: Vec<f64>,
    dropout: f64,
}

/// Activations kept from a training forward pass.
#[derive(Debug)]
pub struct ForwardCache {
    /// Layer inputs: the batch itself, then each post-dropout hidden activation.
    inputs: Vec<DMatrix<f64>>,
    /// Pre-activations of hidden layers.
    pre: Vec<DMatrix<f64>>,
    /// Inverted-dropout multipliers for hidden layers (empty when disabled).
    masks: Vec<DMatrix<f64>>,
}

fn layer_len(input: usize, output: usize) -> usize {
    input * output + output
}

impl Mlp {
    pub fn from_params(widths: Vec<usize>, params: Vec<f64>, dropout: f64) -> Result<Self, BpnnError> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(BpnnError::Config(format!("invalid layer widths {widths:?}")));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(BpnnError::Config(format!("dropout {dropout} outside [0, 1)")));
        }
        let expected: usize = widths.windows(2).map(|w| layer_len(w[0], w[1])).sum();
        if params.len() != expected {
            return Err(BpnnError::Dimension {
                expected,
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(BpnnError::Config("non-finite network parameter".into()));
        }
        Ok(Self {
            widths,
            params,
            dropout,
        })
    }

    /// Kaiming-uniform weights (`±√(6/fan_in)`) and biases in `±1/√fan_in`.
    pub fn init(widths: &[usize], dropout: f64, seed: u64) -> Result<Self, BpnnError> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(BpnnError::Config(format!("invalid layer widths {widths:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::new();
        for w in widths.windows(2) {
            let fan_in = w[0] as f64;
            let wb = (6.0 / fan_in).sqrt();
            let bb = 1.0 / fan_in.sqrt();
            params.extend((0..w[0] * w[1]).map(|_| rng.gen_range(-wb..wb)));
            params.extend((0..w[1]).map(|_| rng.gen_range(-bb..bb)));
        }
        Self::from_params(widths.to_vec(), params, dropout)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn dropout(&self) -> f64 {
        self.dropout
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for w in self.widths.windows(2) {
            off.push(off.last().unwrap() + layer_len(w[0], w[1]));
        }
        off
    }

    /// `(weights, bias)` of layer `l`.
    pub fn layer(&self, l: usize) -> (DMatrixView<'_, f64>, &[f64]) {
        let off = self.offsets()[l];
        let (i, o) = (self.widths[l], self.widths[l + 1]);
        let w = DMatrixView::from_slice(&self.params[off..off + i * o], o, i);
        (w, &self.params[off + i * o..off + i * o + o])
    }

    fn affine(&self, l: usize, x: &DMatrix<f64>) -> DMatrix<f64> {
        let (w, b) = self.layer(l);
        let mut z = DMatrix::zeros(w.nrows(), x.ncols());
        z.gemm(1.0, &w, x, 0.0);
        for mut col in z.column_iter_mut() {
            for (v, bi) in col.iter_mut().zip(b) {
                *v += bi;
            }
        }
        z
    }

    fn check_input(&self, x: &DMatrix<f64>) -> Result<(), BpnnError> {
        if x.nrows() != self.input_width() {
            return Err(BpnnError::Dimension {
                expected: self.input_width(),
                got: x.nrows(),
            });
        }
        Ok(())
    }

    /// Inference pass (dropout disabled). Columns of `x` are samples.
    pub fn forward(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>, BpnnError> {
        self.check_input(x)?;
        let last = self.n_layers() - 1;
        let mut h = self.affine(0, x);
        for l in 1..=last {
            h.apply(|v| *v = v.max(0.0));
            h = self.affine(l, &h);
        }
        Ok(h)
    }

    /// Training pass with inverted dropout on hidden activations.
    pub fn forward_train(&self, x: &DMatrix<f64>, rng: &mut impl Rng) -> Result<(DMatrix<f64>, ForwardCache), BpnnError> {
        self.check_input(x)?;
        let last = self.n_layers() - 1;
        let keep = 1.0 - self.dropout;
        let mut cache = ForwardCache {
            inputs: vec![x.clone()],
            pre: Vec::with_capacity(last),
            masks: Vec::new(),
        };
        let mut z = self.affine(0, x);
        for l in 1..=last {
            let mut h = z.map(|v| v.max(0.0));
            if self.dropout > 0.0 {
                let mask = DMatrix::from_fn(h.nrows(), h.ncols(), |_, _| {
                    if rng.gen::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                });
                h.component_mul_assign(&mask);
                cache.masks.push(mask);
            }
            cache.pre.push(z);
            z = self.affine(l, &h);
            cache.inputs.push(h);
        }
        Ok((z, cache))
    }

    /// Gradient of a scalar loss with respect to the flat parameters, given
    /// its gradient with respect to the network outputs.
    pub fn backward(&self, cache: &ForwardCache, d_out: &DMatrix<f64>) -> Vec<f64> {
        let offsets = self.offsets();
        let mut grad = vec![0.0; self.params.len()];
        let mut dz = d_out.clone();
        for l in (0..self.n_layers()).rev() {
            let x = &cache.inputs[l];
            let (i, o) = (self.widths[l], self.widths[l + 1]);
            let off = offsets[l];
            let dw = &dz * x.transpose();
            grad[off..off + i * o].copy_from_slice(dw.as_slice());
            for (r, g) in grad[off + i * o..off + i * o + o].iter_mut().enumerate() {
                *g = dz.row(r).sum();
            }
            if l == 0 {
                break;
            }
            let (w, _) = self.layer(l);
            let mut dh = w.tr_mul(&dz);
            if let Some(mask) = cache.masks.get(l - 1) {
                dh.component_mul_assign(mask);
            }
            let pre = &cache.pre[l - 1];
            dh.zip_apply(pre, |g, z| {
                if z <= 0.0 {
                    *g = 0.0
                }
            });
            dz = dh;
        }
        grad
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded() {
        let a = Mlp::init(&[8, 16, 5], 0.0, 42).unwrap();
        let b = Mlp::init(&[8, 16, 5], 0.0, 42).unwrap();
        let c = Mlp::init(&[8, 16, 5], 0.0, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn layer_shapes() {
        let m = Mlp::init(&[8, 64, 64, 9], 0.0, 1).unwrap();
        let shapes: Vec<(usize, usize)> = (0..3).map(|l| m.layer(l).0.shape()).collect();
        assert_eq!(shapes, vec![(64, 8), (64, 64), (9, 64)]);
        assert_eq!(m.params().len(), 64 * 8 + 64 + 64 * 64 + 64 + 9 * 64 + 9);
    }

    #[test]
    fn first_layer_output_scale() {
        // Monte-Carlo: pre-activation std on unit-normal inputs
        use rand_distr_free::normal;
        let m = Mlp::init(&[32, 64, 1], 0.0, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = DMatrix::from_fn(32, 1000, |_, _| normal(&mut rng));
        let (w, b) = m.layer(0);
        let mut z = w * &x;
        for mut col in z.column_iter_mut() {
            col += nalgebra::DVector::from_column_slice(b);
        }
        let n = z.len() as f64;
        let mean = z.sum() / n;
        let std = (z.map(|v| (v - mean) * (v - mean)).sum() / n).sqrt();
        assert!((0.5..=2.0).contains(&std), "std {std}");
    }

    mod rand_distr_free {
        use rand::Rng;
        /// Box-Muller standard normal.
        pub fn normal(rng: &mut impl Rng) -> f64 {
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Mlp::init(&[8], 0.0, 0).is_err());
        assert!(Mlp::init(&[8, 0, 2], 0.0, 0).is_err());
        assert!(Mlp::init(&[8, 2], 1.0, 0).is_err());
        assert!(Mlp::from_params(vec![2, 1], vec![0.0; 2], 0.0).is_err());
        let m = Mlp::init(&[3, 2], 0.0, 0).unwrap();
        assert!(m.forward(&DMatrix::zeros(4, 1)).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        // loss = Σ outputs² / 2 over a batch of 3
        let m = Mlp::init(&[4, 6, 5, 3], 0.0, 3).unwrap();
        let x = DMatrix::from_fn(4, 3, |i, j| (i as f64 - 1.3) * 0.7 + j as f64 * 0.4);
        let loss = |p: &[f64]| {
            let mm = Mlp::from_params(m.widths().to_vec(), p.to_vec(), 0.0).unwrap();
            mm.forward(&x).unwrap().map(|v| v * v).sum() / 2.0
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (out, cache) = m.forward_train(&x, &mut rng).unwrap();
        let g = m.backward(&cache, &out);
        let h = 1e-6;
        for k in 0..m.params().len() {
            let mut hi = m.params().to_vec();
            let mut lo = m.params().to_vec();
            hi[k] += h;
            lo[k] -= h;
            let fd = (loss(&hi) - loss(&lo)) / (2.0 * h);
            assert!((fd - g[k]).abs() <= 1e-6 * fd.abs().max(1.0), "param {k}: {} vs {fd}", g[k]);
        }
    }

    #[test]
    fn dropout_masks_scale_kept_units() {
        let m = Mlp::init(&[3, 50, 2], 0.4, 0).unwrap();
        let x = DMatrix::from_element(3, 20, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, cache) = m.forward_train(&x, &mut rng).unwrap();
        let mask = &cache.masks[0];
        assert!(mask.iter().all(|&v| v == 0.0 || (v - 1.0 / 0.6).abs() < 1e-15));
        let kept = mask.iter().filter(|&&v| v > 0.0).count() as f64 / mask.len() as f64;
        assert!((kept - 0.6).abs() < 0.05);
    }
}
