//! Versioned text checkpoint for trained BPNN models.
//!
//! ```text
//! phaseret-checkpoint 1
//! roots_per_segment 4
//! segments 1
//! hidden 64 64
//! dropout 0
//! learning_rate 0.001
//! epochs 6000
//! seed 0
//! widths 1000 64 64 9
//! omegas 1000 100 100.4 …
//! params 69129
//! <one parameter per line, network order>
//! end
//! ```
//!
//! Keys appear in exactly this order. Floats are written in shortest
//! round-trip form, so loading reproduces the parameters bit for bit.
//! Parameter order follows [`Mlp`]: per layer the column-major weight matrix
//! then the bias.

use std::fmt::Write as _;
use std::path::Path;

use super::{BpnnConfig, BpnnError, BpnnModel, Mlp};
use crate::blaschke::GridPartition;

const MAGIC: &str = "phaseret-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported checkpoint version {0}")]
    Version(String),
    #[error("checkpoint is inconsistent: {0}")]
    Model(#[from] BpnnError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: BpnnConfig,
    pub widths: Vec<usize>,
    pub omegas: Vec<f64>,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn from_model(model: &BpnnModel) -> Self {
        Self {
            config: model.config.clone(),
            widths: model.mlp.widths().to_vec(),
            omegas: model.partition.omegas().to_vec(),
            params: model.mlp.params().to_vec(),
        }
    }

    pub fn into_model(self) -> Result<BpnnModel, CheckpointError> {
        self.config.validate()?;
        if self.widths != self.config.widths(self.omegas.len()) {
            return Err(BpnnError::Config("layer widths disagree with the configuration".into()).into());
        }
        let partition = GridPartition::new(self.omegas, self.config.segments).map_err(BpnnError::from)?;
        let mlp = Mlp::from_params(self.widths, self.params, self.config.dropout)?;
        Ok(BpnnModel {
            mlp,
            config: self.config,
            partition,
        })
    }

    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let join = |v: &mut String, items: &[String]| {
            for it in items {
                v.push(' ');
                v.push_str(it);
            }
        };
        writeln!(s, "{MAGIC} {VERSION}").unwrap();
        writeln!(s, "roots_per_segment {}", c.roots_per_segment).unwrap();
        writeln!(s, "segments {}", c.segments).unwrap();
        s.push_str("hidden");
        join(&mut s, &c.hidden.iter().map(usize::to_string).collect::<Vec<_>>());
        s.push('\n');
        writeln!(s, "dropout {}", c.dropout).unwrap();
        writeln!(s, "learning_rate {}", c.learning_rate).unwrap();
        writeln!(s, "epochs {}", c.epochs).unwrap();
        writeln!(s, "seed {}", c.seed).unwrap();
        s.push_str("widths");
        join(&mut s, &self.widths.iter().map(usize::to_string).collect::<Vec<_>>());
        s.push('\n');
        write!(s, "omegas {}", self.omegas.len()).unwrap();
        join(&mut s, &self.omegas.iter().map(f64::to_string).collect::<Vec<_>>());
        s.push('\n');
        writeln!(s, "params {}", self.params.len()).unwrap();
        for p in &self.params {
            writeln!(s, "{p}").unwrap();
        }
        s.push_str("end\n");
        s
    }

    pub fn parse(text: &str) -> Result<Self, CheckpointError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |key: &str| -> Result<(usize, Vec<&str>), CheckpointError> {
            let (line, l) = lines.next().ok_or(CheckpointError::Syntax {
                line: 0,
                msg: format!("unexpected end of input, expected {key:?}"),
            })?;
            let mut parts = l.split_ascii_whitespace();
            match parts.next() {
                Some(k) if k == key => Ok((line, parts.collect())),
                other => Err(CheckpointError::Syntax {
                    line,
                    msg: format!("expected {key:?}, found {:?}", other.unwrap_or("")),
                }),
            }
        };
        fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, CheckpointError> {
            s.parse().map_err(|_| CheckpointError::Syntax {
                line,
                msg: format!("bad number {:?}", s.chars().take(32).collect::<String>()),
            })
        }
        fn one<T: std::str::FromStr>((line, v): (usize, Vec<&str>)) -> Result<T, CheckpointError> {
            match v.as_slice() {
                [x] => num(line, x),
                _ => Err(CheckpointError::Syntax {
                    line,
                    msg: "expected exactly one value".into(),
                }),
            }
        }
        fn many<T: std::str::FromStr>((line, v): (usize, Vec<&str>)) -> Result<Vec<T>, CheckpointError> {
            v.iter().map(|x| num(line, x)).collect()
        }

        let (_, version) = next(MAGIC)?;
        if version != [VERSION.to_string().as_str()] {
            return Err(CheckpointError::Version(version.join(" ")));
        }
        let roots_per_segment = one(next("roots_per_segment")?)?;
        let segments = one(next("segments")?)?;
        let hidden = many(next("hidden")?)?;
        let dropout = one(next("dropout")?)?;
        let learning_rate = one(next("learning_rate")?)?;
        let epochs = one(next("epochs")?)?;
        let seed = one(next("seed")?)?;
        let widths = many(next("widths")?)?;
        let (line, omega_fields) = next("omegas")?;
        let (count, rest) = omega_fields.split_first().ok_or(CheckpointError::Syntax {
            line,
            msg: "missing frequency count".into(),
        })?;
        let count: usize = num(line, count)?;
        if rest.len() != count {
            return Err(CheckpointError::Syntax {
                line,
                msg: format!("{count} frequencies declared, {} given", rest.len()),
            });
        }
        let omegas: Vec<f64> = rest.iter().map(|x| num(line, x)).collect::<Result<_, _>>()?;
        let n_params: usize = one(next("params")?)?;
        let mut params = Vec::with_capacity(n_params.min(1 << 24));
        for _ in 0..n_params {
            let (line, l) = lines.next().ok_or(CheckpointError::Syntax {
                line: 0,
                msg: "parameter list truncated".into(),
            })?;
            params.push(num::<f64>(line, l)?);
        }
        match lines.next() {
            Some((_, "end")) => {}
            Some((line, _)) => {
                return Err(CheckpointError::Syntax {
                    line,
                    msg: "expected \"end\"".into(),
                })
            }
            None => {
                return Err(CheckpointError::Syntax {
                    line: 0,
                    msg: "missing \"end\"".into(),
                })
            }
        }
        Ok(Self {
            config: BpnnConfig {
                roots_per_segment,
                segments,
                hidden,
                dropout,
                learning_rate,
                epochs,
                seed,
            },
            widths,
            omegas,
            params,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|source| CheckpointError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CheckpointError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CheckpointError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}
