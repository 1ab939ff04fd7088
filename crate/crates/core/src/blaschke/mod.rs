//! Unimodular phase models built from finite Blaschke products.
//!
//! The phase of a response on the imaginary axis is modeled as
//! `b̃(jω) = e^{jφ} · P(jω̂) / P*(jω̂)` where `P` is monic with free complex
//! roots and `ω̂` is the frequency after an affine normalization. Each factor
//! `(jω̂ − a)/conj(jω̂ − a)` has unit modulus, so the model is unimodular for
//! any root set.

mod partition;

pub use partition::{equal_partition, GridPartition};

use crate::numerics::{ensure_finite, Complex};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BlaschkeError {
    #[error("root {index} has negative real part")]
    NegativeRealPart { index: usize },
    #[error("root {index} equals ±1, where its normalization factor is undefined")]
    RootAtUnit { index: usize },
    #[error("evaluation point {z} is a pole")]
    Pole { z: Complex },
    #[error("non-finite model parameter at index {0}")]
    NonFinite(usize),
    #[error("frequency band [{lo}, {hi}] is empty or reversed")]
    InvalidBand { lo: f64, hi: f64 },
    #[error("frequencies must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("frequency {0} is not covered by any segment")]
    Uncovered(f64),
    #[error("negative magnitude at index {0}")]
    NegativeMagnitude(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Strictly increasing affine map from physical frequency to the normalized
/// coordinate used inside the Blaschke factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyMap {
    center: f64,
    scale: f64,
}

impl FrequencyMap {
    pub fn identity() -> Self {
        Self {
            center: 0.0,
            scale: 1.0,
        }
    }

    /// Maps `[lo, hi]` onto `[-1, 1]`. A single-point band maps to 0.
    pub fn spanning(lo: f64, hi: f64) -> Result<Self, BlaschkeError> {
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(BlaschkeError::InvalidBand { lo, hi });
        }
        let scale = if hi > lo { 2.0 / (hi - lo) } else { 1.0 };
        Ok(Self {
            center: 0.5 * (lo + hi),
            scale,
        })
    }

    #[inline]
    pub fn normalize(&self, omega: f64) -> f64 {
        (omega - self.center) * self.scale
    }
}

/// `((1+z)/(1−z))^n · ∏ (|a−1|/(a−1)) (|a+1|/(a+1)) (z−a)/(z+ā)` for roots in
/// the closed right half plane.
pub fn eval_finite_blaschke(roots: &[Complex], n: i32, z: Complex) -> Result<Complex, BlaschkeError> {
    let one = Complex::new(1.0, 0.0);
    ensure_finite(roots).map_err(|_| {
        BlaschkeError::NonFinite(roots.iter().position(|a| !a.is_finite()).unwrap_or(0))
    })?;
    for (index, a) in roots.iter().enumerate() {
        if a.re < 0.0 {
            return Err(BlaschkeError::NegativeRealPart { index });
        }
        if *a == one || *a == -one {
            return Err(BlaschkeError::RootAtUnit { index });
        }
    }
    let mut acc = if n == 0 {
        one
    } else {
        if (n > 0 && z == one) || (n < 0 && z == -one) {
            return Err(BlaschkeError::Pole { z });
        }
        ((one + z) / (one - z)).powi(n)
    };
    for a in roots {
        let den = z + a.conj();
        if den == Complex::new(0.0, 0.0) {
            return Err(BlaschkeError::Pole { z });
        }
        let left = (a - one).norm() / (a - one);
        let right = (a + one).norm() / (a + one);
        acc *= left * right * (z - a) / den;
    }
    Ok(acc)
}

/// Phase model `e^{jφ} ∏ (jω̂ − a_k)/conj(jω̂ − a_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkePhaseModel {
    roots: Vec<Complex>,
    phase_angle: f64,
    rotor: Complex,
    map: FrequencyMap,
}

impl BlaschkePhaseModel {
    pub fn new(roots: Vec<Complex>, phase_angle: f64, map: FrequencyMap) -> Result<Self, BlaschkeError> {
        if let Some(i) = roots.iter().position(|a| !a.is_finite()) {
            return Err(BlaschkeError::NonFinite(i));
        }
        if !phase_angle.is_finite() {
            return Err(BlaschkeError::NonFinite(roots.len()));
        }
        Ok(Self {
            roots,
            phase_angle,
            rotor: Complex::from_polar(1.0, phase_angle),
            map,
        })
    }

    /// Builds a model from the flat layout `[Re a_1, Im a_1, …, Re a_m, Im a_m, φ]`.
    pub fn from_flat(params: &[f64], map: FrequencyMap) -> Result<Self, BlaschkeError> {
        if params.is_empty() || params.len().is_multiple_of(2) {
            return Err(BlaschkeError::LengthMismatch {
                expected: 2 * (params.len() / 2) + 1,
                got: params.len(),
            });
        }
        let m = params.len() / 2;
        let roots = (0..m)
            .map(|k| Complex::new(params[2 * k], params[2 * k + 1]))
            .collect();
        Self::new(roots, params[2 * m], map)
    }

    pub fn roots(&self) -> &[Complex] {
        &self.roots
    }

    pub fn phase_angle(&self) -> f64 {
        self.phase_angle
    }

    pub fn map(&self) -> FrequencyMap {
        self.map
    }

    /// Value of the model at one physical frequency.
    pub fn phase_at(&self, omega: f64) -> Result<Complex, BlaschkeError> {
        let w = self.map.normalize(omega);
        // ∏ u/conj(u) = P/conj(P) = P²/|P|² with P = ∏ u, u = jω̂ − a
        let mut p = Complex::new(1.0, 0.0);
        for (k, a) in self.roots.iter().enumerate() {
            p *= Complex::new(-a.re, w - a.im);
            if k % 16 == 15 {
                p /= p.norm();
            }
        }
        let d = p.norm_sqr();
        if d == 0.0 || !d.is_finite() {
            return self.phase_at_per_root(w);
        }
        let inv = 1.0 / d;
        Ok(self.rotor * Complex::new((p.re * p.re - p.im * p.im) * inv, 2.0 * p.re * p.im * inv))
    }

    fn phase_at_per_root(&self, w: f64) -> Result<Complex, BlaschkeError> {
        let mut acc = self.rotor;
        for a in &self.roots {
            let u = Complex::new(-a.re, w - a.im);
            let d = u.norm_sqr();
            if d == 0.0 {
                return Err(BlaschkeError::Pole {
                    z: Complex::new(0.0, w),
                });
            }
            acc *= Complex::new((u.re * u.re - u.im * u.im) / d, 2.0 * u.re * u.im / d);
        }
        Ok(acc)
    }

    pub fn eval_phase(&self, omegas: &[f64]) -> Result<Vec<Complex>, BlaschkeError> {
        omegas.iter().map(|&w| self.phase_at(w)).collect()
    }

    /// Value at `omega` plus the derivative of the phase angle θ (with
    /// `b̃ = e^{jθ}`) with respect to each flat parameter, written into
    /// `dtheta` in the layout of [`BlaschkePhaseModel::from_flat`].
    /// `∂b̃/∂p = j·b̃·∂θ/∂p`.
    pub fn phase_with_angle_gradient(&self, omega: f64, dtheta: &mut [f64]) -> Result<Complex, BlaschkeError> {
        debug_assert_eq!(dtheta.len(), 2 * self.roots.len() + 1);
        let w = self.map.normalize(omega);
        let mut acc = self.rotor;
        for (k, a) in self.roots.iter().enumerate() {
            let (r, v) = (-a.re, w - a.im);
            let d = r * r + v * v;
            if d == 0.0 {
                return Err(BlaschkeError::Pole {
                    z: Complex::new(0.0, w),
                });
            }
            let inv = 1.0 / d;
            acc *= Complex::new((r * r - v * v) * inv, 2.0 * r * v * inv);
            // θ gains 2·arg(u), u = -Re a + j(ω̂ - Im a)
            dtheta[2 * k] = 2.0 * v * inv;
            dtheta[2 * k + 1] = -2.0 * r * inv;
        }
        dtheta[2 * self.roots.len()] = 1.0;
        Ok(acc)
    }
}

/// Contiguous, non-overlapping frequency segments each carrying its own model.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedPhaseModel {
    boundaries: Vec<f64>,
    models: Vec<BlaschkePhaseModel>,
}

impl SegmentedPhaseModel {
    /// `boundaries` has one more entry than `models`; segment `k` covers
    /// `[b_k, b_{k+1})`, the last one closed on the right.
    pub fn new(boundaries: Vec<f64>, models: Vec<BlaschkePhaseModel>) -> Result<Self, BlaschkeError> {
        if models.is_empty() || boundaries.len() != models.len() + 1 {
            return Err(BlaschkeError::LengthMismatch {
                expected: models.len() + 1,
                got: boundaries.len(),
            });
        }
        if let Some(i) = boundaries.iter().position(|b| !b.is_finite()) {
            return Err(BlaschkeError::NonFinite(i));
        }
        for i in 1..boundaries.len() {
            if boundaries[i] <= boundaries[i - 1] {
                return Err(BlaschkeError::NotIncreasing(i));
            }
        }
        Ok(Self { boundaries, models })
    }

    pub fn segments(&self) -> usize {
        self.models.len()
    }

    pub fn models(&self) -> &[BlaschkePhaseModel] {
        &self.models
    }

    pub fn segment_of(&self, omega: f64) -> Result<usize, BlaschkeError> {
        let b = &self.boundaries;
        let last = b.len() - 1;
        if !(omega >= b[0] && omega <= b[last]) {
            return Err(BlaschkeError::Uncovered(omega));
        }
        if omega == b[last] {
            return Ok(last - 1);
        }
        // number of boundaries <= omega, minus one
        Ok(b.partition_point(|&x| x <= omega) - 1)
    }

    pub fn eval_phase_segmented(&self, omegas: &[f64]) -> Result<Vec<Complex>, BlaschkeError> {
        omegas
            .iter()
            .map(|&w| self.models[self.segment_of(w)?].phase_at(w))
            .collect()
    }
}

/// A frequency grid with complex response values.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    omegas: Vec<f64>,
    values: Vec<Complex>,
}

impl ComplexSpectrum {
    pub fn new(omegas: Vec<f64>, values: Vec<Complex>) -> Result<Self, BlaschkeError> {
        if omegas.len() != values.len() {
            return Err(BlaschkeError::LengthMismatch {
                expected: omegas.len(),
                got: values.len(),
            });
        }
        check_grid(&omegas)?;
        if let Err(crate::numerics::NumericsError::NonFinite(i)) = ensure_finite(&values) {
            return Err(BlaschkeError::NonFinite(i));
        }
        Ok(Self { omegas, values })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

pub(crate) fn check_grid(omegas: &[f64]) -> Result<(), BlaschkeError> {
    if let Some(i) = omegas.iter().position(|w| !w.is_finite()) {
        return Err(BlaschkeError::NonFinite(i));
    }
    match (1..omegas.len()).find(|&i| omegas[i] <= omegas[i - 1]) {
        Some(i) => Err(BlaschkeError::NotIncreasing(i)),
        None => Ok(()),
    }
}

/// `f̃_i = |f_i| · b̃_i`.
pub fn reconstruct(magnitudes: &[f64], phase: &[Complex]) -> Result<Vec<Complex>, BlaschkeError> {
    if magnitudes.len() != phase.len() {
        return Err(BlaschkeError::LengthMismatch {
            expected: magnitudes.len(),
            got: phase.len(),
        });
    }
    magnitudes
        .iter()
        .zip(phase)
        .enumerate()
        .map(|(i, (&m, &b))| {
            if m < 0.0 || m.is_nan() {
                Err(BlaschkeError::NegativeMagnitude(i))
            } else {
                Ok(b * m)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
