//! Segment count × roots-per-segment sweep for the piecewise model.

use std::fmt::Write as _;
use std::path::Path;

use super::{run_parallel, HarnessError, PiecewiseSweepSection};
use crate::bpnn::{train_bpnn, BpnnConfig};
use crate::datasets::{take_subset, SpectralDataset};

/// One heatmap cell: the lowest test MSE over the runs that succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatCell {
    pub segments: usize,
    pub roots: usize,
    pub best_mse: Option<f64>,
    pub failures: usize,
    pub error: Option<String>,
}

impl HeatCell {
    pub fn best_mse_db(&self) -> Option<f64> {
        self.best_mse.map(super::to_db)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub segments: Vec<usize>,
    pub roots: Vec<usize>,
    /// Row-major over `segments`, then `roots`.
    pub cells: Vec<HeatCell>,
}

/// Trains `runs` piecewise models per (segments, roots) pair on the first
/// `train_size` training spectra. Seeds are `seed`, `seed + 1`, ...
pub fn piecewise_hparam_sweep(
    section: &PiecewiseSweepSection,
    train: &SpectralDataset,
    test: &SpectralDataset,
    seed: u64,
    jobs: usize,
) -> Result<Heatmap, HarnessError> {
    if section.segments.is_empty() || section.roots.is_empty() || section.runs == 0 {
        return Err(HarnessError::Config("sweep needs segments, roots and runs >= 1".into()));
    }
    if section.train_size == 0 || section.train_size > train.len() {
        return Err(HarnessError::Config(format!(
            "sweep train_size {} must be in 1..={}",
            section.train_size,
            train.len()
        )));
    }
    let idx: Vec<usize> = (0..section.train_size).collect();
    let subset = take_subset(train, &idx);
    let mut items = Vec::new();
    for &s in &section.segments {
        for &m in &section.roots {
            for run in 0..section.runs as u64 {
                items.push((s, m, seed + run));
            }
        }
    }
    let outcomes = run_parallel(jobs, &items, |&(segments, roots, seed)| {
        let config = BpnnConfig {
            roots_per_segment: roots,
            segments,
            hidden: section.hidden.clone(),
            dropout: 0.0,
            learning_rate: section.learning_rate,
            epochs: section.epochs,
            seed,
        };
        train_bpnn(&config, &subset, test)
            .map(|(r, _)| r.best_test_mse)
            .map_err(|e| e.to_string())
    })?;
    let cells = items
        .chunks(section.runs)
        .zip(outcomes.chunks(section.runs))
        .map(|(it, out)| HeatCell {
            segments: it[0].0,
            roots: it[0].1,
            best_mse: out.iter().filter_map(|r| r.as_ref().ok().copied()).min_by(f64::total_cmp),
            failures: out.iter().filter(|r| r.is_err()).count(),
            error: out.iter().find_map(|r| r.as_ref().err().cloned()),
        })
        .collect();
    Ok(Heatmap {
        segments: section.segments.clone(),
        roots: section.roots.clone(),
        cells,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl Heatmap {
    pub fn cell(&self, segments: usize, roots: usize) -> Option<&HeatCell> {
        self.cells.iter().find(|c| c.segments == segments && c.roots == roots)
    }

    /// Lowest-MSE cell, ties broken by order.
    pub fn best(&self) -> Option<&HeatCell> {
        self.cells
            .iter()
            .filter(|c| c.best_mse.is_some())
            .min_by(|a, b| a.best_mse.unwrap().total_cmp(&b.best_mse.unwrap()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["segments", "roots", "total_roots", "best_mse", "best_mse_db", "failures", "error"])
            .expect("in-memory write");
        for c in &self.cells {
            w.write_record([
                c.segments.to_string(),
                c.roots.to_string(),
                (c.segments * c.roots).to_string(),
                opt(c.best_mse),
                opt(c.best_mse_db()),
                c.failures.to_string(),
                c.error.clone().unwrap_or_default().replace(['\n', '\r'], " "),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    /// Grid of dB values, darker for lower error. Failed cells are grey.
    pub fn render_svg(&self) -> String {
        let (cw, ch, left, top) = (72.0, 40.0, 90.0, 40.0);
        let width = left + cw * self.roots.len() as f64 + 20.0;
        let height = top + ch * self.segments.len() as f64 + 50.0;
        let dbs: Vec<f64> = self.cells.iter().filter_map(HeatCell::best_mse_db).collect();
        let lo = dbs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = dbs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, "<!-- data\n{}-->", self.to_csv_string().replace("--", "- -")).unwrap();
        writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{left}" y="20">test MSE (dB), rows: segments, columns: roots per segment</text>"#)
            .unwrap();
        for (j, m) in self.roots.iter().enumerate() {
            let x = left + cw * (j as f64 + 0.5);
            writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{m}</text>"#, top - 4.0).unwrap();
        }
        for (i, seg) in self.segments.iter().enumerate() {
            let y = top + ch * i as f64;
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{seg}</text>"#, left - 8.0, y + ch / 2.0 + 4.0).unwrap();
            for (j, m) in self.roots.iter().enumerate() {
                let x = left + cw * j as f64;
                let cell = self.cell(*seg, *m);
                let (fill, label, text) = match cell.and_then(HeatCell::best_mse_db) {
                    Some(db) => {
                        let t = if hi > lo { (db - lo) / (hi - lo) } else { 0.5 };
                        let g = (40.0 + 200.0 * t).round() as u8;
                        let text = if g > 150 { "black" } else { "white" };
                        (format!("rgb({g},{g},255)"), format!("{db:.1}"), text)
                    }
                    None => ("rgb(200,200,200)".to_string(), "n/a".to_string(), "black"),
                };
                writeln!(
                    s,
                    r#"<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{fill}" stroke="white"><title>segments={seg} roots={m}: {label}</title></rect>"#
                )
                .unwrap();
                writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="middle" fill="{text}">{label}</text>"#,
                    x + cw / 2.0,
                    y + ch / 2.0 + 4.0
                )
                .unwrap();
            }
        }
        s.push_str("</svg>\n");
        s
    }

    /// Writes `<stem>.csv` and `<stem>.svg` into `dir`.
    pub fn emit(&self, dir: impl AsRef<Path>, stem: &str) -> Result<(), HarnessError> {
        let dir = dir.as_ref();
        for (ext, body) in [("csv", self.to_csv_string()), ("svg", self.render_svg())] {
            let path = dir.join(format!("{stem}.{ext}"));
            std::fs::write(&path, body).map_err(|source| HarnessError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        Ok(())
    }
}
