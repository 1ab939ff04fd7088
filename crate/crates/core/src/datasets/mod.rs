//! Spectral datasets: synthetic generators, the canonical text file format,
//! and train/test splitting.

mod io;
mod physics;
mod split;
mod synthetic;

pub use io::{load_spectral_file, parse_spectral_str, save_spectral_file, write_spectral_string};
pub use physics::{lorentzian_permittivity, transfer_matrix_t, LorentzianParams, Oscillator};
pub use split::{split_dataset, take_subset};
pub use synthetic::{
    gen_lorentzian_dataset, gen_ode_dataset, LorentzianConfig, LorentzianRanges, OdeConfig, OdeGenerator,
    OdePolynomial,
};

use crate::blaschke::{check_grid, BlaschkeError};
use crate::numerics::Complex;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },
    #[error("frequency grid is not strictly increasing at position {0}")]
    NonMonotoneGrid(usize),
    #[error("line {line}: non-finite value in field {field}")]
    NonFinite { line: usize, field: usize },
    #[error("line {line}: cannot parse field {field} ({text:?})")]
    Parse { line: usize, field: usize, text: String },
    #[error("no samples")]
    NoSamples,
    #[error("sample {sample}: {expected} values expected, found {found}")]
    SampleLength { sample: usize, expected: usize, found: usize },
    #[error("sample {sample}: stored magnitude disagrees with |value| at frequency {index}")]
    MagnitudeMismatch { sample: usize, index: usize },
    #[error("relative permittivity is zero at ω = {0}")]
    ZeroPermittivity(f64),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid generator setting: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One spectrum: complex response on the dataset grid plus optional
/// metadata (geometry parameters and the like).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub metadata: Vec<f64>,
    pub values: Vec<Complex>,
    pub magnitudes: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<Complex>, metadata: Vec<f64>) -> Self {
        let magnitudes = values.iter().map(|v| v.norm()).collect();
        Self {
            metadata,
            values,
            magnitudes,
        }
    }
}

/// Samples sharing one strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDataset {
    omegas: Vec<f64>,
    samples: Vec<Sample>,
    metadata_names: Vec<String>,
}

impl SpectralDataset {
    pub fn new(omegas: Vec<f64>, samples: Vec<Sample>) -> Result<Self, DatasetError> {
        match check_grid(&omegas) {
            Ok(()) => {}
            Err(BlaschkeError::NotIncreasing(i)) => return Err(DatasetError::NonMonotoneGrid(i)),
            Err(_) => return Err(DatasetError::NonFinite { line: 1, field: 0 }),
        }
        if omegas.is_empty() {
            return Err(DatasetError::MalformedHeader("empty frequency grid".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.values.len() != omegas.len() {
                return Err(DatasetError::SampleLength {
                    sample: i,
                    expected: omegas.len(),
                    found: s.values.len(),
                });
            }
            if s.magnitudes.len() != omegas.len() {
                return Err(DatasetError::SampleLength {
                    sample: i,
                    expected: omegas.len(),
                    found: s.magnitudes.len(),
                });
            }
            for (k, (v, m)) in s.values.iter().zip(&s.magnitudes).enumerate() {
                if (v.norm() - m).abs() > 1e-12 * m.max(1.0) {
                    return Err(DatasetError::MagnitudeMismatch { sample: i, index: k });
                }
            }
        }
        Ok(Self {
            omegas,
            samples,
            metadata_names: Vec::new(),
        })
    }

    pub fn with_metadata_names(mut self, names: Vec<String>) -> Self {
        self.metadata_names = names;
        self
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn metadata_names(&self) -> &[String] {
        &self.metadata_names
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_freq(&self) -> usize {
        self.omegas.len()
    }

    pub(crate) fn from_parts_unchecked(omegas: Vec<f64>, samples: Vec<Sample>, names: Vec<String>) -> Self {
        Self {
            omegas,
            samples,
            metadata_names: names,
        }
    }
}
