//! Canonical dataset text format.
//!
//! ```text
//! #freq:100,100.4,100.8
//! # comment lines and blank lines are ignored
//! 0.25,1.5,0.1,-0.2,0.3,0.05,-0.7
//! ```
//!
//! The first line is `#freq:` followed by the `N` grid values. Every further
//! non-comment line is one sample: `K` optional metadata fields followed by
//! `2N` numbers alternating real and imaginary parts. `K` is inferred from
//! the first sample and must be the same for all. Fields are comma separated.
//! Metadata names, when present, live in a sibling `<file>.meta` holding one
//! comma-separated line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{DatasetError, Sample, SpectralDataset};
use crate::numerics::Complex;

const HEADER: &str = "#freq:";

fn parse_fields(line: &str, line_no: usize) -> Result<Vec<f64>, DatasetError> {
    line.split(',')
        .enumerate()
        .map(|(field, text)| {
            let t = text.trim();
            let v: f64 = t.parse().map_err(|_| DatasetError::Parse {
                line: line_no,
                field,
                text: t.chars().take(32).collect(),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(DatasetError::NonFinite { line: line_no, field })
            }
        })
        .collect()
}

/// Parses a dataset from the canonical text format.
pub fn parse_spectral_str(text: &str) -> Result<SpectralDataset, DatasetError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines
        .next()
        .ok_or_else(|| DatasetError::MalformedHeader("empty input".into()))?;
    let grid_text = first
        .trim()
        .strip_prefix(HEADER)
        .ok_or_else(|| DatasetError::MalformedHeader(format!("first line must start with {HEADER:?}")))?;
    if grid_text.trim().is_empty() {
        return Err(DatasetError::MalformedHeader("no frequencies".into()));
    }
    let omegas = parse_fields(grid_text, 1).map_err(|e| match e {
        DatasetError::Parse { field, text, .. } => {
            DatasetError::MalformedHeader(format!("frequency {field} is not a number: {text:?}"))
        }
        other => other,
    })?;
    if let Some(i) = (1..omegas.len()).find(|&i| omegas[i] <= omegas[i - 1]) {
        return Err(DatasetError::NonMonotoneGrid(i));
    }
    let n = omegas.len();

    let mut samples = Vec::new();
    let mut width: Option<usize> = None;
    for (line_no, line) in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = parse_fields(trimmed, line_no)?;
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected || fields.len() < 2 * n {
            return Err(DatasetError::RaggedRow {
                line: line_no,
                expected: expected.max(2 * n),
                found: fields.len(),
            });
        }
        let k = fields.len() - 2 * n;
        let values = fields[k..]
            .chunks_exact(2)
            .map(|p| Complex::new(p[0], p[1]))
            .collect();
        samples.push(Sample::new(values, fields[..k].to_vec()));
    }
    if samples.is_empty() {
        return Err(DatasetError::NoSamples);
    }
    SpectralDataset::new(omegas, samples)
}

fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_spectral_file(path: impl AsRef<Path>) -> Result<SpectralDataset, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut data = parse_spectral_str(&text)?;
    let meta = meta_path(path);
    if meta.exists() {
        let names = std::fs::read_to_string(&meta).map_err(io_err(&meta))?;
        let line = names
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .unwrap_or("");
        let names: Vec<String> = line
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        data = data.with_metadata_names(names);
    }
    Ok(data)
}

/// Renders a dataset in the canonical format. Floats use the shortest
/// representation that parses back to the same bits.
pub fn write_spectral_string(data: &SpectralDataset) -> String {
    let mut out = String::with_capacity(32 * data.n_freq() * (data.len() + 1));
    out.push_str(HEADER);
    for (i, w) in data.omegas().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{w}").unwrap();
    }
    out.push('\n');
    for s in data.samples() {
        let mut first = true;
        let mut put = |out: &mut String, v: f64| {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{v}").unwrap();
        };
        for &m in &s.metadata {
            put(&mut out, m);
        }
        for v in &s.values {
            put(&mut out, v.re);
            put(&mut out, v.im);
        }
        out.push('\n');
    }
    out
}

pub fn save_spectral_file(data: &SpectralDataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    std::fs::write(path, write_spectral_string(data)).map_err(io_err(path))?;
    if !data.metadata_names().is_empty() {
        let meta = meta_path(path);
        std::fs::write(&meta, data.metadata_names().join(",") + "\n").map_err(io_err(&meta))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_file() {
        let d = parse_spectral_str("#freq:1,2\n\n# note\n0.5,1,0,0,1\n7,-1,0.5,2,0\n").unwrap();
        assert_eq!(d.omegas(), &[1.0, 2.0]);
        assert_eq!(d.len(), 2);
        assert_eq!(d.samples()[0].metadata, vec![0.5]);
        assert_eq!(d.samples()[1].values[0], Complex::new(-1.0, 0.5));
        assert_eq!(d.samples()[1].magnitudes[1], 2.0);
    }

    #[test]
    fn whitespace_and_scientific_notation() {
        let d = parse_spectral_str("#freq: 1e2 , 2.5E2\n 1.0e-3 , -2 ,3,4\n").unwrap();
        assert_eq!(d.omegas(), &[100.0, 250.0]);
        assert_eq!(d.samples()[0].values[0], Complex::new(1e-3, -2.0));
    }

    #[test]
    fn empty_sample_section() {
        assert!(matches!(parse_spectral_str("#freq:1,2\n# nothing\n"), Err(DatasetError::NoSamples)));
    }

    #[test]
    fn malformed_header() {
        assert!(matches!(parse_spectral_str("freq:1,2\n1,2,3,4\n"), Err(DatasetError::MalformedHeader(_))));
        assert!(matches!(parse_spectral_str("#freq:\n"), Err(DatasetError::MalformedHeader(_))));
        assert!(matches!(parse_spectral_str("#freq:1,x\n1,2,3,4\n"), Err(DatasetError::MalformedHeader(_))));
        assert!(matches!(parse_spectral_str(""), Err(DatasetError::MalformedHeader(_))));
    }

    #[test]
    fn ragged_rows() {
        assert!(matches!(
            parse_spectral_str("#freq:1,2\n1,2,3,4\n1,2,3\n"),
            Err(DatasetError::RaggedRow { line: 3, .. })
        ));
        assert!(matches!(
            parse_spectral_str("#freq:1,2\n1,2,3\n"),
            Err(DatasetError::RaggedRow { line: 2, .. })
        ));
    }

    #[test]
    fn non_monotone_grid() {
        assert!(matches!(
            parse_spectral_str("#freq:1,3,2\n1,2,3,4,5,6\n"),
            Err(DatasetError::NonMonotoneGrid(2))
        ));
    }

    #[test]
    fn nan_entries() {
        assert!(matches!(
            parse_spectral_str("#freq:1,2\n1,NaN,3,4\n"),
            Err(DatasetError::NonFinite { line: 2, field: 1 })
        ));
        assert!(matches!(
            parse_spectral_str("#freq:1,inf\n1,2,3,4\n"),
            Err(DatasetError::NonFinite { line: 1, .. })
        ));
    }

    #[test]
    fn garbage_field() {
        assert!(matches!(
            parse_spectral_str("#freq:1\n1,abc\n"),
            Err(DatasetError::Parse { line: 2, field: 1, .. })
        ));
    }
}
