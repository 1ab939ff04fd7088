use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::physics::{transfer_matrix_t, LorentzianParams, Oscillator};
use super::{DatasetError, Sample, SpectralDataset};
use crate::numerics::{eval_poly_from_roots, Complex, J};

/// Right-hand side `p(z)` of `df/dz = p(z)`.
#[derive(Debug, Clone, PartialEq)]
pub enum OdePolynomial {
    /// Roots drawn uniformly on the unit circle; the count is the degree.
    RandomUnitRoots { degree: usize },
    /// Monic polynomial with the given roots.
    Roots(Vec<Complex>),
    /// Coefficients in ascending powers; `[0]` is the zero polynomial.
    Coefficients(Vec<Complex>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeConfig {
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_freq: usize,
    pub band: (f64, f64),
    pub polynomial: OdePolynomial,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_train: 50,
            n_test: 1000,
            n_freq: 200,
            band: (0.0, 2.0),
            polynomial: OdePolynomial::RandomUnitRoots { degree: 4 },
        }
    }
}

/// Forward-Euler integration of `df/dz = p(z)` along `z = jω`, one shared
/// polynomial per dataset and a random initial value per sample.
#[derive(Debug, Clone)]
pub struct OdeGenerator {
    config: OdeConfig,
    poly: OdePolynomial,
    rng: ChaCha8Rng,
}

impl OdeGenerator {
    pub fn new(config: OdeConfig) -> Result<Self, DatasetError> {
        if config.n_train == 0 || config.n_test == 0 || config.n_freq < 2 {
            return Err(DatasetError::InvalidConfig(
                "ODE dataset needs n_train, n_test >= 1 and n_freq >= 2".into(),
            ));
        }
        if !(config.band.1 > config.band.0) {
            return Err(DatasetError::InvalidConfig("ODE band must be increasing".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let poly = match &config.polynomial {
            OdePolynomial::RandomUnitRoots { degree } => OdePolynomial::Roots(
                (0..*degree)
                    .map(|_| Complex::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
                    .collect(),
            ),
            other => other.clone(),
        };
        Ok(Self { config, poly, rng })
    }

    /// The concrete polynomial (random roots already drawn).
    pub fn polynomial(&self) -> &OdePolynomial {
        &self.poly
    }

    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = self.config.band;
        let n = self.config.n_freq;
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn eval_rhs(&self, z: Complex) -> Complex {
        match &self.poly {
            OdePolynomial::Roots(r) => eval_poly_from_roots(r, z),
            OdePolynomial::Coefficients(c) => c.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &k| acc * z + k),
            OdePolynomial::RandomUnitRoots { .. } => unreachable!("roots drawn in new()"),
        }
    }

    /// Euler solution on the grid from the initial value at the first point.
    pub fn integrate(&self, grid: &[f64], initial: Complex) -> Vec<Complex> {
        let mut out = Vec::with_capacity(grid.len());
        let mut f = initial;
        out.push(f);
        for w in grid.windows(2) {
            // dz = j dω along the imaginary axis
            f += self.eval_rhs(J * w[0]) * J * (w[1] - w[0]);
            out.push(f);
        }
        out
    }

    pub fn generate(mut self) -> Result<(SpectralDataset, SpectralDataset), DatasetError> {
        let grid = self.grid();
        let draw = |count: usize, gen: &mut Self| -> Vec<Sample> {
            (0..count)
                .map(|_| {
                    let f0 = Complex::new(gen.rng.gen_range(-1.0..1.0), gen.rng.gen_range(-1.0..1.0));
                    Sample::new(gen.integrate(&grid, f0), vec![])
                })
                .collect()
        };
        let train = draw(self.config.n_train, &mut self);
        let test = draw(self.config.n_test, &mut self);
        Ok((SpectralDataset::new(grid.clone(), train)?, SpectralDataset::new(grid, test)?))
    }
}

pub fn gen_ode_dataset(config: OdeConfig) -> Result<(SpectralDataset, SpectralDataset), DatasetError> {
    OdeGenerator::new(config)?.generate()
}

/// Sampling ranges for the Lorentzian slab generator. Frequencies are in THz,
/// lengths in µm, and `speed` is the vacuum light speed in µm·THz.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianRanges {
    /// Plasma frequency as a fraction of the band width.
    pub plasma_fraction: (f64, f64),
    /// Resonance frequency range; `None` uses the generator band.
    pub resonance: Option<(f64, f64)>,
    pub damping: (f64, f64),
    pub eps_inf: f64,
    pub thickness: f64,
    pub speed: f64,
}

impl Default for LorentzianRanges {
    fn default() -> Self {
        Self {
            plasma_fraction: (0.2, 1.5),
            resonance: None,
            damping: (1.0, 20.0),
            eps_inf: 1.0,
            thickness: 1.0,
            speed: 300.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianConfig {
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_freq: usize,
    pub band: (f64, f64),
    pub oscillators: usize,
    pub ranges: LorentzianRanges,
}

impl Default for LorentzianConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_train: 50,
            n_test: 2000,
            n_freq: 1000,
            band: (100.0, 500.0),
            oscillators: 4,
            ranges: LorentzianRanges::default(),
        }
    }
}

impl LorentzianConfig {
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = self.band;
        let n = self.n_freq;
        if n == 1 {
            return vec![lo];
        }
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn sample_params(&self, rng: &mut impl Rng) -> LorentzianParams {
        let r = &self.ranges;
        let width = self.band.1 - self.band.0;
        let resonance = r.resonance.unwrap_or(self.band);
        let oscillators = (0..self.oscillators)
            .map(|_| Oscillator {
                plasma: rng.gen_range(r.plasma_fraction.0..=r.plasma_fraction.1) * width,
                resonance: rng.gen_range(resonance.0..=resonance.1),
                damping: rng.gen_range(r.damping.0..=r.damping.1),
            })
            .collect();
        LorentzianParams {
            eps_inf: r.eps_inf,
            oscillators,
            thickness: r.thickness,
            speed: r.speed,
        }
    }

    pub fn metadata_names(&self) -> Vec<String> {
        (1..=self.oscillators)
            .flat_map(|k| [format!("plasma{k}"), format!("resonance{k}"), format!("damping{k}")])
            .collect()
    }
}

/// Transmission spectra of Lorentzian slabs with independently drawn
/// oscillator parameters per sample. Metadata holds the oscillator triples.
pub fn gen_lorentzian_dataset(config: &LorentzianConfig) -> Result<(SpectralDataset, SpectralDataset), DatasetError> {
    if config.n_train == 0 || config.n_test == 0 || config.n_freq == 0 {
        return Err(DatasetError::InvalidConfig("Lorentzian dataset needs nonzero counts".into()));
    }
    let r = &config.ranges;
    if !(config.band.1 > config.band.0 && config.band.0 >= 0.0)
        || r.plasma_fraction.0 <= 0.0
        || r.damping.0 <= 0.0
        || r.plasma_fraction.1 < r.plasma_fraction.0
        || r.damping.1 < r.damping.0
    {
        return Err(DatasetError::InvalidConfig("Lorentzian ranges must be positive and ordered".into()));
    }
    let grid = config.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draw = |count: usize| -> Result<Vec<Sample>, DatasetError> {
        (0..count)
            .map(|_| {
                let p = config.sample_params(&mut rng);
                let values = grid
                    .iter()
                    .map(|&w| transfer_matrix_t(&p, w))
                    .collect::<Result<Vec<_>, _>>()?;
                if values.iter().any(|v| !v.is_finite() || v.norm() == 0.0) {
                    return Err(DatasetError::InvalidConfig(
                        "transmission underflowed or overflowed; reduce thickness".into(),
                    ));
                }
                let meta = p
                    .oscillators
                    .iter()
                    .flat_map(|o| [o.plasma, o.resonance, o.damping])
                    .collect();
                Ok(Sample::new(values, meta))
            })
            .collect()
    };
    let train = draw(config.n_train)?;
    let test = draw(config.n_test)?;
    let names = config.metadata_names();
    Ok((
        SpectralDataset::new(grid.clone(), train)?.with_metadata_names(names.clone()),
        SpectralDataset::new(grid, test)?.with_metadata_names(names),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_ode(poly: OdePolynomial, n_freq: usize) -> OdeConfig {
        OdeConfig {
            seed: 5,
            n_train: 3,
            n_test: 20,
            n_freq,
            polynomial: poly,
            ..OdeConfig::default()
        }
    }

    #[test]
    fn ode_default_sizes() {
        let (train, test) = gen_ode_dataset(OdeConfig::default()).unwrap();
        assert_eq!((train.len(), test.len(), train.n_freq()), (50, 1000, 200));
        assert_eq!(train.omegas(), test.omegas());
        assert_eq!(train.omegas()[0], 0.0);
        assert_eq!(*train.omegas().last().unwrap(), 2.0);
    }

    #[test]
    fn ode_unit_circle_roots() {
        let g = OdeGenerator::new(OdeConfig::default()).unwrap();
        match g.polynomial() {
            OdePolynomial::Roots(r) => {
                assert_eq!(r.len(), 4);
                assert!(r.iter().all(|a| (a.norm() - 1.0).abs() < 1e-15));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_polynomial_gives_constant_response() {
        let (train, _) = gen_ode_dataset(small_ode(OdePolynomial::Coefficients(vec![Complex::new(0.0, 0.0)]), 50)).unwrap();
        for s in train.samples() {
            assert!(s.values.iter().all(|&v| v == s.values[0]));
        }
    }

    #[test]
    fn unit_polynomial_matches_antiderivative() {
        let (train, _) = gen_ode_dataset(small_ode(OdePolynomial::Coefficients(vec![Complex::new(1.0, 0.0)]), 80)).unwrap();
        let grid = train.omegas();
        for s in train.samples() {
            let f0 = s.values[0];
            for (w, v) in grid.iter().zip(&s.values) {
                let exact = f0 + J * (w - grid[0]);
                assert!((v - exact).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn magnitudes_are_moduli() {
        let (train, _) = gen_ode_dataset(small_ode(OdePolynomial::RandomUnitRoots { degree: 4 }, 30)).unwrap();
        for s in train.samples() {
            for (v, m) in s.values.iter().zip(&s.magnitudes) {
                assert!(*m > 0.0);
                assert!((v.norm() - m).abs() < 1e-12);
                // value = magnitude · unit phase
                assert!((v - *m * (v / v.norm())).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn ode_rejects_empty_counts() {
        let cfg = OdeConfig {
            n_train: 0,
            ..OdeConfig::default()
        };
        assert!(gen_ode_dataset(cfg).is_err());
    }

    #[test]
    fn lorentzian_sizes_and_consistency() {
        let cfg = LorentzianConfig {
            n_train: 4,
            n_test: 6,
            ..LorentzianConfig::default()
        };
        let (train, test) = gen_lorentzian_dataset(&cfg).unwrap();
        assert_eq!(train.n_freq(), 1000);
        assert_eq!((train.len(), test.len()), (4, 6));
        assert_eq!(train.omegas()[0], 100.0);
        assert_eq!(*train.omegas().last().unwrap(), 500.0);
        for s in train.samples().iter().chain(test.samples()) {
            assert_eq!(s.metadata.len(), 12);
            for (v, m) in s.values.iter().zip(&s.magnitudes) {
                assert!((v.norm() - m).abs() <= 1e-12);
                assert!(*m > 0.0);
            }
        }
    }

    #[test]
    fn lorentzian_is_seeded() {
        let cfg = LorentzianConfig {
            n_train: 2,
            n_test: 2,
            n_freq: 50,
            ..LorentzianConfig::default()
        };
        assert_eq!(gen_lorentzian_dataset(&cfg).unwrap(), gen_lorentzian_dataset(&cfg).unwrap());
        let other = LorentzianConfig { seed: 1, ..cfg.clone() };
        assert_ne!(gen_lorentzian_dataset(&cfg).unwrap().0, gen_lorentzian_dataset(&other).unwrap().0);
    }
}
