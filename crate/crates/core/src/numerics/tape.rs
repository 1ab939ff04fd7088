//! Replayable reverse-mode tape.
//!
//! Operations are recorded once as a flat instruction list over parameter
//! slots and constants. [`DiffTape::forward`] replays the list for a given
//! parameter vector and [`DiffTape::backward`] sweeps it in reverse to produce
//! the gradient of the last node. Complex quantities are carried as pairs of
//! real nodes ([`CVar`]).

use super::NumericsError;

/// Handle to a node on a [`DiffTape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A complex value as a pair of real tape nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CVar {
    pub re: Var,
    pub im: Var,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Param(usize),
    Const(f64),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    Neg(Var),
    Relu(Var),
    Sin(Var),
    Cos(Var),
    Sqrt(Var),
    Log(Var),
    Square(Var),
}

#[derive(Debug, Clone, Default)]
pub struct DiffTape {
    ops: Vec<Op>,
    values: Vec<f64>,
    adjoints: Vec<f64>,
    n_params: usize,
    evaluated: bool,
}

impl DiffTape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn push(&mut self, op: Op) -> Var {
        self.evaluated = false;
        let id = u32::try_from(self.ops.len()).expect("tape exceeds u32 nodes");
        self.ops.push(op);
        Var(id)
    }

    pub fn param(&mut self, index: usize) -> Var {
        self.push(Op::Param(index))
    }

    pub fn constant(&mut self, value: f64) -> Var {
        self.push(Op::Const(value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.push(Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.push(Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.push(Op::Mul(a, b))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        self.push(Op::Div(a, b))
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.push(Op::Neg(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.push(Op::Relu(a))
    }

    pub fn sin(&mut self, a: Var) -> Var {
        self.push(Op::Sin(a))
    }

    pub fn cos(&mut self, a: Var) -> Var {
        self.push(Op::Cos(a))
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        self.push(Op::Sqrt(a))
    }

    pub fn log(&mut self, a: Var) -> Var {
        self.push(Op::Log(a))
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.push(Op::Square(a))
    }

    /// Sum of a non-empty slice of nodes.
    pub fn sum(&mut self, terms: &[Var]) -> Var {
        let mut it = terms.iter().copied();
        let first = it.next().expect("sum of empty slice");
        it.fold(first, |acc, t| self.add(acc, t))
    }

    pub fn complex_const(&mut self, re: f64, im: f64) -> CVar {
        CVar {
            re: self.constant(re),
            im: self.constant(im),
        }
    }

    pub fn cadd(&mut self, a: CVar, b: CVar) -> CVar {
        CVar {
            re: self.add(a.re, b.re),
            im: self.add(a.im, b.im),
        }
    }

    pub fn csub(&mut self, a: CVar, b: CVar) -> CVar {
        CVar {
            re: self.sub(a.re, b.re),
            im: self.sub(a.im, b.im),
        }
    }

    pub fn cmul(&mut self, a: CVar, b: CVar) -> CVar {
        let rr = self.mul(a.re, b.re);
        let ii = self.mul(a.im, b.im);
        let ri = self.mul(a.re, b.im);
        let ir = self.mul(a.im, b.re);
        CVar {
            re: self.sub(rr, ii),
            im: self.add(ri, ir),
        }
    }

    pub fn conj(&mut self, a: CVar) -> CVar {
        CVar {
            re: a.re,
            im: self.neg(a.im),
        }
    }

    /// `|a|²` as a real node.
    pub fn abs2(&mut self, a: CVar) -> Var {
        let r = self.square(a.re);
        let i = self.square(a.im);
        self.add(r, i)
    }

    pub fn cdiv(&mut self, a: CVar, b: CVar) -> CVar {
        let den = self.abs2(b);
        let bc = self.conj(b);
        let num = self.cmul(a, bc);
        CVar {
            re: self.div(num.re, den),
            im: self.div(num.im, den),
        }
    }

    /// Real scaling of a complex value.
    pub fn cscale(&mut self, a: CVar, s: Var) -> CVar {
        CVar {
            re: self.mul(a.re, s),
            im: self.mul(a.im, s),
        }
    }

    /// `cos θ + j sin θ`.
    pub fn cis(&mut self, theta: Var) -> CVar {
        CVar {
            re: self.cos(theta),
            im: self.sin(theta),
        }
    }

    /// Replays the tape with `params` and returns the value of the last node.
    pub fn forward(&mut self, params: &[f64]) -> Result<f64, NumericsError> {
        if self.ops.is_empty() {
            return Err(NumericsError::EmptyTape);
        }
        self.values.clear();
        self.values.reserve(self.ops.len());
        for op in &self.ops {
            let v = &self.values;
            let x = match *op {
                Op::Param(i) => *params.get(i).ok_or(NumericsError::ParamIndex {
                    index: i,
                    len: params.len(),
                })?,
                Op::Const(c) => c,
                Op::Add(a, b) => v[a.index()] + v[b.index()],
                Op::Sub(a, b) => v[a.index()] - v[b.index()],
                Op::Mul(a, b) => v[a.index()] * v[b.index()],
                Op::Div(a, b) => v[a.index()] / v[b.index()],
                Op::Neg(a) => -v[a.index()],
                Op::Relu(a) => v[a.index()].max(0.0),
                Op::Sin(a) => v[a.index()].sin(),
                Op::Cos(a) => v[a.index()].cos(),
                Op::Sqrt(a) => v[a.index()].sqrt(),
                Op::Log(a) => v[a.index()].ln(),
                Op::Square(a) => v[a.index()] * v[a.index()],
            };
            self.values.push(x);
        }
        self.n_params = params.len();
        self.evaluated = true;
        Ok(*self.values.last().unwrap())
    }

    /// Value of a node after the latest forward pass.
    pub fn value(&self, var: Var) -> Option<f64> {
        if self.evaluated {
            self.values.get(var.index()).copied()
        } else {
            None
        }
    }

    /// Gradient of the last node with respect to every parameter slot of the
    /// latest forward pass. ReLU uses a zero subgradient at the origin.
    pub fn backward(&mut self) -> Result<Vec<f64>, NumericsError> {
        if !self.evaluated {
            return Err(NumericsError::NotEvaluated);
        }
        let n = self.ops.len();
        self.adjoints.clear();
        self.adjoints.resize(n, 0.0);
        self.adjoints[n - 1] = 1.0;
        let mut grad = vec![0.0; self.n_params];
        let v = &self.values;
        let adj = &mut self.adjoints;
        for k in (0..n).rev() {
            let g = adj[k];
            if g == 0.0 {
                continue;
            }
            match self.ops[k] {
                Op::Param(i) => grad[i] += g,
                Op::Const(_) => {}
                Op::Add(a, b) => {
                    adj[a.index()] += g;
                    adj[b.index()] += g;
                }
                Op::Sub(a, b) => {
                    adj[a.index()] += g;
                    adj[b.index()] -= g;
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (v[a.index()], v[b.index()]);
                    adj[a.index()] += g * vb;
                    adj[b.index()] += g * va;
                }
                Op::Div(a, b) => {
                    let vb = v[b.index()];
                    adj[a.index()] += g / vb;
                    adj[b.index()] -= g * v[k] / vb;
                }
                Op::Neg(a) => adj[a.index()] -= g,
                Op::Relu(a) => {
                    if v[a.index()] > 0.0 {
                        adj[a.index()] += g;
                    }
                }
                Op::Sin(a) => adj[a.index()] += g * v[a.index()].cos(),
                Op::Cos(a) => adj[a.index()] -= g * v[a.index()].sin(),
                Op::Sqrt(a) => adj[a.index()] += g * 0.5 / v[k],
                Op::Log(a) => adj[a.index()] += g / v[a.index()],
                Op::Square(a) => adj[a.index()] += 2.0 * g * v[a.index()],
            }
        }
        Ok(grad)
    }

    /// Adjoint of a node after the latest backward pass.
    pub fn adjoint(&self, var: Var) -> Option<f64> {
        self.adjoints.get(var.index()).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Complex;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn square_value_and_slope() {
        let mut t = DiffTape::new();
        let x = t.param(0);
        t.square(x);
        assert_eq!(t.forward(&[3.0]).unwrap(), 9.0);
        assert_eq!(t.backward().unwrap(), vec![6.0]);
    }

    #[test]
    fn relu_dead_unit() {
        let mut t = DiffTape::new();
        let x = t.param(0);
        t.relu(x);
        assert_eq!(t.forward(&[-2.0]).unwrap(), 0.0);
        assert_eq!(t.backward().unwrap(), vec![0.0]);
        t.forward(&[0.0]).unwrap();
        assert_eq!(t.backward().unwrap(), vec![0.0]);
    }

    #[test]
    fn error_paths() {
        let mut t = DiffTape::new();
        assert_eq!(t.forward(&[]), Err(NumericsError::EmptyTape));
        let x = t.param(2);
        t.square(x);
        assert_eq!(t.backward(), Err(NumericsError::NotEvaluated));
        assert_eq!(
            t.forward(&[1.0]),
            Err(NumericsError::ParamIndex { index: 2, len: 1 })
        );
    }

    #[test]
    fn loss_adjoint_is_one() {
        let mut t = DiffTape::new();
        let x = t.param(0);
        let y = t.sin(x);
        let out = t.mul(y, x);
        t.forward(&[0.4]).unwrap();
        t.backward().unwrap();
        assert_eq!(t.adjoint(out), Some(1.0));
    }

    #[test]
    fn one_frequency_toy_loss_matches_direct() {
        // |f - m·e^{jφ}(jw - a)/conj(jw - a)|² with params (Re a, Im a, φ)
        let (w, m, f) = (0.3, 1.7, Complex::new(0.2, -1.1));
        let mut t = DiffTape::new();
        let ar = t.param(0);
        let ai = t.param(1);
        let phi = t.param(2);
        let wv = t.constant(w);
        let u = CVar {
            re: t.neg(ar),
            im: t.sub(wv, ai),
        };
        let uc = t.conj(u);
        let g = t.cdiv(u, uc);
        let rot = t.cis(phi);
        let b = t.cmul(rot, g);
        let mv = t.constant(m);
        let pred = t.cscale(b, mv);
        let fv = t.complex_const(f.re, f.im);
        let d = t.csub(fv, pred);
        t.abs2(d);

        let p = [0.4, -0.2, 0.9];
        let got = t.forward(&p).unwrap();
        let a = Complex::new(p[0], p[1]);
        let u = Complex::new(0.0, w) - a;
        let direct = (f - m * Complex::from_polar(1.0, p[2]) * u / u.conj()).norm_sqr();
        assert!((got - direct).abs() < 1e-14);
    }

    /// A fixed composite expression over 10 parameters exercising every op.
    fn composite(t: &mut DiffTape) {
        let p: Vec<Var> = (0..10).map(|i| t.param(i)).collect();
        let a = t.mul(p[0], p[1]);
        let b = t.sin(p[2]);
        let c = t.cos(p[3]);
        let d = t.add(a, b);
        let e = t.sub(d, c);
        let sq = t.square(p[4]);
        let one = t.constant(1.0);
        let pos = t.add(sq, one);
        let f = t.sqrt(pos);
        let g = t.log(pos);
        let h = t.div(p[5], f);
        let r = t.relu(p[6]);
        let n = t.neg(p[7]);
        let k = t.mul(p[8], p[9]);
        let z1 = CVar { re: e, im: g };
        let z2 = CVar { re: h, im: r };
        let z3 = t.cmul(z1, z2);
        let den = CVar { re: pos, im: n };
        let z4 = t.cdiv(z3, den);
        let m = t.abs2(z4);
        let out = t.sum(&[m, k, r]);
        t.square(out);
    }

    fn central_difference(t: &mut DiffTape, p: &[f64], h: f64) -> Vec<f64> {
        (0..p.len())
            .map(|i| {
                let mut hi = p.to_vec();
                let mut lo = p.to_vec();
                hi[i] += h;
                lo[i] -= h;
                (t.forward(&hi).unwrap() - t.forward(&lo).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn composite_matches_finite_differences() {
        let mut t = DiffTape::new();
        composite(&mut t);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mut p: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.5..1.5)).collect();
            // keep the relu input away from its kink
            if p[6].abs() < 1e-3 {
                p[6] = 0.5;
            }
            t.forward(&p).unwrap();
            let g = t.backward().unwrap();
            let fd = central_difference(&mut t, &p, 1e-5);
            for (a, b) in g.iter().zip(&fd) {
                let scale = a.abs().max(b.abs());
                assert!(
                    (a - b).abs() <= 1e-4 * scale || (a - b).abs() <= 1e-7,
                    "{a} vs {b}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn replay_is_repeatable(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let mut t = DiffTape::new();
            let a = t.param(0);
            let b = t.param(1);
            let s = t.mul(a, b);
            t.cos(s);
            let v1 = t.forward(&[x, y]).unwrap();
            let g1 = t.backward().unwrap();
            let v2 = t.forward(&[x, y]).unwrap();
            let g2 = t.backward().unwrap();
            prop_assert_eq!(v1.to_bits(), v2.to_bits());
            prop_assert_eq!(g1, g2);
        }
    }
}
