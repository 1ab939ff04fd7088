//! Self-contained SVG figures. Every figure carries its data as a CSV block
//! inside an XML comment, so values can be read back without rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::table::{to_db, ResultsTable};
use super::HarnessError;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// One plotted point: best MSE over seeds for a (method, arch, size).
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub train_size: usize,
    pub best_mse: f64,
}

/// Successful rows grouped by `method/arch`, reduced to the best seed per
/// training size.
pub fn series(table: &ResultsTable) -> BTreeMap<String, Vec<SeriesPoint>> {
    let mut out: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for r in table.rows.iter().filter(|r| r.is_ok()) {
        let Some(mse) = r.best_mse else { continue };
        let slot = out
            .entry(format!("{}/{}", r.method, r.arch))
            .or_default()
            .entry(r.train_size)
            .or_insert(f64::INFINITY);
        *slot = slot.min(mse);
    }
    out.into_iter()
        .map(|(k, v)| {
            let pts = v
                .into_iter()
                .map(|(train_size, best_mse)| SeriesPoint { train_size, best_mse })
                .collect();
            (k, pts)
        })
        .collect()
}

fn nice_step(span: f64) -> f64 {
    for step in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
        if span / step <= 8.0 {
            return step;
        }
    }
    100.0
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Test MSE in dB against training size (log axis), one line per
/// method/architecture.
pub fn render_svg(table: &ResultsTable) -> Result<String, HarnessError> {
    if table.is_empty() {
        return Err(HarnessError::EmptyTable);
    }
    let series = series(table);
    let points: Vec<(f64, f64)> = series
        .values()
        .flatten()
        .map(|p| ((p.train_size as f64).log10(), to_db(p.best_mse)))
        .filter(|(_, y)| y.is_finite())
        .collect();
    let (mut x0, mut x1) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if points.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, -10.0, 0.0);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let step = nice_step((y1 - y0).max(1.0));
    y0 = (y0 / step).floor() * step;
    y1 = ((y1 / step).ceil() * step).max(y0 + step);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    s.push_str("<!-- data\nseries,train_size,best_mse,best_mse_db\n");
    for (name, pts) in &series {
        for p in pts {
            writeln!(s, "{},{},{},{}", name.replace("--", "- -"), p.train_size, p.best_mse, to_db(p.best_mse)).unwrap();
        }
    }
    s.push_str("-->\n");
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    let mut y = y0;
    while y <= y1 + 1e-9 {
        let py = sy(y);
        writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{y}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0
        )
        .unwrap();
        y += step;
    }
    let mut sizes: Vec<usize> = series.values().flatten().map(|p| p.train_size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    for n in sizes {
        let px = sx((n as f64).log10());
        writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{n}</text>"#,
            TOP + ph + 18.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">training set size</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">best test MSE (dB)</text>"#,
        TOP + ph / 2.0
    )
    .unwrap();
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<(f64, f64, &SeriesPoint)> = pts
            .iter()
            .filter(|p| to_db(p.best_mse).is_finite())
            .map(|p| (sx((p.train_size as f64).log10()), sy(to_db(p.best_mse)), p))
            .collect();
        let path: Vec<String> = coords.iter().map(|(x, y, _)| format!("{x:.2},{y:.2}")).collect();
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        )
        .unwrap();
        for (x, y, p) in &coords {
            writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"><title>{} n={}: {} dB</title></circle>"#,
                escape(name),
                p.train_size,
                to_db(p.best_mse)
            )
            .unwrap();
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(table: &ResultsTable, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let svg = render_svg(table)?;
    let path = path.as_ref();
    std::fs::write(path, svg).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}
