//! The BPNN loss recorded on a [`DiffTape`], parameterized by the flat
//! network parameters. Independent of the matrix backpropagation used for
//! training; used to cross-check its gradients.

use crate::blaschke::GridPartition;
use crate::numerics::{CVar, Complex, DiffTape, Var};

use super::Mlp;

/// Records `mean_j (1/N) Σ_i |f_ji − |f_ji|·b̃_ji|²` for the given samples.
/// Tape parameter `k` is `mlp.params()[k]`; magnitudes and truth are constants.
pub fn record_bpnn_loss(
    mlp: &Mlp,
    partition: &GridPartition,
    roots_per_segment: usize,
    samples: &[(Vec<f64>, Vec<Complex>)],
) -> DiffTape {
    let mut t = DiffTape::new();
    let widths = mlp.widths().to_vec();
    let n = partition.omegas().len();
    let block = 2 * roots_per_segment + 1;
    let mut sample_losses = Vec::with_capacity(samples.len());
    for (mags, truth) in samples {
        // network
        let mut h: Vec<Var> = mags.iter().map(|&m| t.constant(m)).collect();
        let mut off = 0;
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let mut next = Vec::with_capacity(fan_out);
            for r in 0..fan_out {
                let mut acc = t.param(off + fan_in * fan_out + r);
                for (c, &x) in h.iter().enumerate() {
                    let w = t.param(off + c * fan_out + r);
                    let p = t.mul(w, x);
                    acc = t.add(acc, p);
                }
                next.push(if l + 2 < widths.len() { t.relu(acc) } else { acc });
            }
            off += fan_in * fan_out + fan_out;
            h = next;
        }
        // Blaschke phase and loss
        let mut terms = Vec::with_capacity(n);
        for (s, range) in partition.ranges().iter().enumerate() {
            let p = &h[s * block..(s + 1) * block];
            let map = partition.map(s);
            for i in range.clone() {
                let w = t.constant(map.normalize(partition.omegas()[i]));
                let mut b = t.cis(p[2 * roots_per_segment]);
                for k in 0..roots_per_segment {
                    let u = CVar {
                        re: t.neg(p[2 * k]),
                        im: t.sub(w, p[2 * k + 1]),
                    };
                    let uc = t.conj(u);
                    let g = t.cdiv(u, uc);
                    b = t.cmul(b, g);
                }
                let m = t.constant(mags[i]);
                let pred = t.cscale(b, m);
                let f = t.complex_const(truth[i].re, truth[i].im);
                let r = t.csub(f, pred);
                terms.push(t.abs2(r));
            }
        }
        let sum = t.sum(&terms);
        let inv_n = t.constant(1.0 / n as f64);
        sample_losses.push(t.mul(sum, inv_n));
    }
    let total = t.sum(&sample_losses);
    let inv_b = t.constant(1.0 / samples.len() as f64);
    t.mul(total, inv_b);
    t
}
