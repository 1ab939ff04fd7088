//! Experiment configuration, read from TOML. The schema is documented in
//! `docs/config.md`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::baselines::{AaaNetConfig, FcnnGrid, MusicConfig, RetrieveOptions};
use crate::bpnn::BpnnConfig;
use crate::datasets::{LorentzianConfig, LorentzianRanges, OdeConfig, OdePolynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Bpnn,
    PiecewiseBpnn,
    FcnnGrid,
    Kk,
    AaaNet,
    Music,
    LinearBp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Bpnn => "bpnn",
            Method::PiecewiseBpnn => "piecewise-bpnn",
            Method::FcnnGrid => "fcnn-grid",
            Method::Kk => "kk",
            Method::AaaNet => "aaa-net",
            Method::Music => "music",
            Method::LinearBp => "linear-bp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Method::Bpnn,
            Method::PiecewiseBpnn,
            Method::FcnnGrid,
            Method::Kk,
            Method::AaaNet,
            Method::Music,
            Method::LinearBp,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LorentzianSpec {
    pub seed: Option<u64>,
    pub n_train: usize,
    pub n_test: usize,
    pub n_freq: usize,
    pub band: [f64; 2],
    pub oscillators: usize,
    pub plasma_fraction: [f64; 2],
    pub resonance: Option<[f64; 2]>,
    pub damping: [f64; 2],
    pub eps_inf: f64,
    pub thickness: f64,
    pub speed: f64,
}

impl Default for LorentzianSpec {
    fn default() -> Self {
        let c = LorentzianConfig::default();
        let r = c.ranges;
        Self {
            seed: None,
            n_train: c.n_train,
            n_test: c.n_test,
            n_freq: c.n_freq,
            band: [c.band.0, c.band.1],
            oscillators: c.oscillators,
            plasma_fraction: [r.plasma_fraction.0, r.plasma_fraction.1],
            resonance: r.resonance.map(|(a, b)| [a, b]),
            damping: [r.damping.0, r.damping.1],
            eps_inf: r.eps_inf,
            thickness: r.thickness,
            speed: r.speed,
        }
    }
}

impl LorentzianSpec {
    pub fn to_config(&self, seed: u64) -> LorentzianConfig {
        LorentzianConfig {
            seed: self.seed.unwrap_or(seed),
            n_train: self.n_train,
            n_test: self.n_test,
            n_freq: self.n_freq,
            band: (self.band[0], self.band[1]),
            oscillators: self.oscillators,
            ranges: LorentzianRanges {
                plasma_fraction: (self.plasma_fraction[0], self.plasma_fraction[1]),
                resonance: self.resonance.map(|[a, b]| (a, b)),
                damping: (self.damping[0], self.damping[1]),
                eps_inf: self.eps_inf,
                thickness: self.thickness,
                speed: self.speed,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdeSpec {
    pub seed: Option<u64>,
    pub n_train: usize,
    pub n_test: usize,
    pub n_freq: usize,
    pub band: [f64; 2],
    pub degree: usize,
}

impl Default for OdeSpec {
    fn default() -> Self {
        let c = OdeConfig::default();
        let degree = match c.polynomial {
            OdePolynomial::RandomUnitRoots { degree } => degree,
            _ => 4,
        };
        Self {
            seed: None,
            n_train: c.n_train,
            n_test: c.n_test,
            n_freq: c.n_freq,
            band: [c.band.0, c.band.1],
            degree,
        }
    }
}

impl OdeSpec {
    pub fn to_config(&self, seed: u64) -> OdeConfig {
        OdeConfig {
            seed: self.seed.unwrap_or(seed),
            n_train: self.n_train,
            n_test: self.n_test,
            n_freq: self.n_freq,
            band: (self.band[0], self.band[1]),
            polynomial: OdePolynomial::RandomUnitRoots { degree: self.degree },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetSpec {
    Lorentzian(LorentzianSpec),
    Ode(OdeSpec),
    Files { train: PathBuf, test: PathBuf },
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Lorentzian(LorentzianSpec::default())
    }
}

impl DatasetSpec {
    pub fn name(&self) -> String {
        match self {
            DatasetSpec::Lorentzian(_) => "lorentzian".into(),
            DatasetSpec::Ode(_) => "ode".into(),
            DatasetSpec::Files { train, .. } => train
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BpnnSection {
    pub roots: usize,
    pub segments: usize,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seeds: usize,
}

impl BpnnSection {
    fn with_shape(roots: usize, segments: usize) -> Self {
        let d = BpnnConfig::default();
        Self {
            roots,
            segments,
            hidden: d.hidden,
            dropout: d.dropout,
            learning_rate: d.learning_rate,
            epochs: d.epochs,
            seeds: 3,
        }
    }

    pub fn to_config(&self, seed: u64) -> BpnnConfig {
        BpnnConfig {
            roots_per_segment: self.roots,
            segments: self.segments,
            hidden: self.hidden.clone(),
            dropout: self.dropout,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            seed,
        }
    }

    pub fn arch(&self, prefix: &str) -> String {
        let hidden: Vec<String> = self.hidden.iter().map(usize::to_string).collect();
        let mut tag = format!("{prefix}-m{}", self.roots);
        if self.segments > 1 {
            tag.push_str(&format!("-s{}", self.segments));
        }
        if !hidden.is_empty() {
            tag.push_str(&format!("-h{}", hidden.join("x")));
        }
        tag
    }
}

impl Default for BpnnSection {
    fn default() -> Self {
        Self::with_shape(4, 1)
    }
}

/// Same fields as [`BpnnSection`], defaulting to twenty segments of three
/// roots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PiecewiseSection {
    pub roots: usize,
    pub segments: usize,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seeds: usize,
}

impl Default for PiecewiseSection {
    fn default() -> Self {
        let b = BpnnSection::with_shape(3, 20);
        Self {
            roots: b.roots,
            segments: b.segments,
            hidden: b.hidden,
            dropout: b.dropout,
            learning_rate: b.learning_rate,
            epochs: b.epochs,
            seeds: b.seeds,
        }
    }
}

impl PiecewiseSection {
    pub fn as_bpnn(&self) -> BpnnSection {
        BpnnSection {
            roots: self.roots,
            segments: self.segments,
            hidden: self.hidden.clone(),
            dropout: self.dropout,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            seeds: self.seeds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearBpSection {
    pub roots: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seeds: usize,
}

impl Default for LinearBpSection {
    fn default() -> Self {
        let d = BpnnConfig::default();
        Self {
            roots: d.roots_per_segment,
            learning_rate: d.learning_rate,
            epochs: d.epochs,
            seeds: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FcnnSection {
    pub widths: Vec<usize>,
    pub depths: Vec<usize>,
    pub dropouts: Vec<f64>,
    pub learning_rates: Vec<f64>,
    pub seeds: usize,
    pub epochs: usize,
}

impl Default for FcnnSection {
    fn default() -> Self {
        let g = FcnnGrid::default();
        Self {
            widths: g.widths,
            depths: g.depths,
            dropouts: g.dropouts,
            learning_rates: g.learning_rates,
            seeds: g.seeds.len(),
            epochs: g.epochs,
        }
    }
}

impl FcnnSection {
    pub fn to_grid(&self, seeds: Vec<u64>) -> FcnnGrid {
        FcnnGrid {
            widths: self.widths.clone(),
            depths: self.depths.clone(),
            dropouts: self.dropouts.clone(),
            learning_rates: self.learning_rates.clone(),
            seeds,
            epochs: self.epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AaaNetSection {
    pub max_m: usize,
    pub tol: f64,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seeds: usize,
}

impl Default for AaaNetSection {
    fn default() -> Self {
        let d = AaaNetConfig::default();
        Self {
            max_m: d.max_m,
            tol: d.tol,
            hidden: d.hidden,
            epochs: d.epochs,
            learning_rate: d.learning_rate,
            seeds: 3,
        }
    }
}

impl AaaNetSection {
    pub fn to_config(&self, seed: u64) -> AaaNetConfig {
        AaaNetConfig {
            max_m: self.max_m,
            tol: self.tol,
            hidden: self.hidden.clone(),
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MusicSection {
    pub p: usize,
    pub grid_factor: usize,
    pub restarts: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub final_lr_ratio: f64,
    pub test_cap: Option<usize>,
    pub seeds: usize,
}

impl Default for MusicSection {
    fn default() -> Self {
        let d = MusicConfig::default();
        Self {
            p: d.p,
            grid_factor: d.grid_factor,
            restarts: d.retrieve.restarts,
            epochs: d.retrieve.epochs,
            learning_rate: d.retrieve.learning_rate,
            final_lr_ratio: d.retrieve.final_lr_ratio,
            test_cap: d.test_cap,
            seeds: 1,
        }
    }
}

impl MusicSection {
    pub fn to_config(&self, seed: u64) -> MusicConfig {
        MusicConfig {
            p: self.p,
            grid_factor: self.grid_factor,
            retrieve: RetrieveOptions {
                restarts: self.restarts,
                epochs: self.epochs,
                learning_rate: self.learning_rate,
                final_lr_ratio: self.final_lr_ratio,
                seed,
            },
            test_cap: self.test_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PiecewiseSweepSection {
    pub segments: Vec<usize>,
    pub roots: Vec<usize>,
    pub runs: usize,
    pub train_size: usize,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for PiecewiseSweepSection {
    fn default() -> Self {
        let d = BpnnConfig::default();
        Self {
            segments: vec![1, 5, 10, 20, 40],
            roots: vec![1, 2, 3, 4, 5],
            runs: 3,
            train_size: 50,
            hidden: d.hidden,
            learning_rate: d.learning_rate,
            epochs: d.epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Seeds the dataset generator and the first training run of every method.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub train_sizes: Vec<usize>,
    pub methods: Vec<Method>,
    /// Fill the `seconds` column. Off by default so that reruns produce
    /// identical files.
    pub record_wall_time: bool,
    pub dataset: DatasetSpec,
    pub bpnn: BpnnSection,
    pub piecewise_bpnn: PiecewiseSection,
    pub linear_bp: LinearBpSection,
    pub fcnn: FcnnSection,
    pub aaa_net: AaaNetSection,
    pub music: MusicSection,
    pub piecewise_sweep: Option<PiecewiseSweepSection>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("results"),
            jobs: 1,
            train_sizes: vec![1, 2, 5, 10, 20, 50],
            methods: vec![Method::Bpnn],
            record_wall_time: false,
            dataset: DatasetSpec::default(),
            bpnn: BpnnSection::default(),
            piecewise_bpnn: PiecewiseSection::default(),
            linear_bp: LinearBpSection::default(),
            fcnn: FcnnSection::default(),
            aaa_net: AaaNetSection::default(),
            music: MusicSection::default(),
            piecewise_sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads and validates a config file. Relative dataset paths are
    /// resolved against the file's directory and must exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let DatasetSpec::Files { train, test } = &mut cfg.dataset {
            for p in [train, test] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.methods.is_empty() {
            return bad("at least one method is required");
        }
        if self.train_sizes.is_empty() || self.train_sizes.contains(&0) {
            return bad("training sizes must be nonempty and positive");
        }
        if self.train_sizes.windows(2).any(|w| w[1] <= w[0]) {
            return bad("training sizes must be strictly increasing");
        }
        for (name, n) in [
            ("bpnn", self.bpnn.seeds),
            ("piecewise_bpnn", self.piecewise_bpnn.seeds),
            ("linear_bp", self.linear_bp.seeds),
            ("fcnn", self.fcnn.seeds),
            ("aaa_net", self.aaa_net.seeds),
            ("music", self.music.seeds),
        ] {
            if n == 0 {
                return Err(HarnessError::Config(format!("[{name}] seeds must be >= 1")));
            }
        }
        for (name, s) in [("bpnn", self.bpnn.clone()), ("piecewise_bpnn", self.piecewise_bpnn.as_bpnn())] {
            s.to_config(0)
                .validate()
                .map_err(|e| HarnessError::Config(format!("[{name}] {e}")))?;
        }
        self.fcnn
            .to_grid(vec![0])
            .validate()
            .map_err(|e| HarnessError::Config(format!("[fcnn] {e}")))?;
        if let Some(sw) = &self.piecewise_sweep {
            if sw.segments.is_empty() || sw.roots.is_empty() || sw.runs == 0 || sw.train_size == 0 {
                return bad("[piecewise_sweep] grids, runs and train_size must be nonempty");
            }
        }
        if let DatasetSpec::Files { train, test } = &self.dataset {
            for p in [train, test] {
                if !p.exists() {
                    return Err(HarnessError::Config(format!("dataset file {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }

    /// Seeds of the runs of a method: `seed, seed + 1, …`.
    pub fn seeds(&self, count: usize) -> Vec<u64> {
        (0..count as u64).map(|i| self.seed.wrapping_add(i)).collect()
    }
}
