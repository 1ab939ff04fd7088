use std::path::Path;

use super::HarnessError;

pub const CSV_COLUMNS: [&str; 12] = [
    "dataset",
    "method",
    "arch",
    "train_size",
    "seed",
    "best_mse",
    "best_mse_db",
    "median_se",
    "epoch_of_best",
    "seconds",
    "status",
    "final_mse",
];

/// One run. Numeric fields are empty for failed runs; `status` is `ok` or
/// `error: <message>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub method: String,
    pub arch: String,
    pub train_size: usize,
    pub seed: u64,
    pub best_mse: Option<f64>,
    pub median_se: Option<f64>,
    pub epoch_of_best: Option<usize>,
    pub seconds: Option<f64>,
    pub status: String,
    pub final_mse: Option<f64>,
}

impl ResultRow {
    pub fn best_mse_db(&self) -> Option<f64> {
        self.best_mse.map(to_db)
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// `10·log10(mse)`.
pub fn to_db(mse: f64) -> f64 {
    10.0 * mse.log10()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl ResultsTable {
    pub fn new(rows: Vec<ResultRow>) -> Self {
        Self { rows }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.dataset.clone(),
                r.method.clone(),
                r.arch.clone(),
                r.train_size.to_string(),
                r.seed.to_string(),
                opt(r.best_mse),
                opt(r.best_mse_db()),
                opt(r.median_se),
                opt(r.epoch_of_best),
                opt(r.seconds),
                r.status.clone(),
                opt(r.final_mse),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn from_csv_str(text: &str) -> Result<Self, HarnessError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let err = |line: u64, msg: String| HarnessError::Csv { line, msg };
        let headers = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
        // files without the trailing final_mse column are accepted
        let n = headers.len();
        if !(n == CSV_COLUMNS.len() || n == CSV_COLUMNS.len() - 1) || headers.iter().ne(CSV_COLUMNS[..n].iter().copied()) {
            return Err(err(1, format!("expected header {}", CSV_COLUMNS.join(","))));
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i as u64 + 2;
            let rec = rec.map_err(|e| err(line, e.to_string()))?;
            let field = |k: usize| rec.get(k).unwrap_or("");
            fn num<T: std::str::FromStr>(s: &str, name: &str, line: u64) -> Result<T, HarnessError> {
                s.parse().map_err(|_| HarnessError::Csv {
                    line,
                    msg: format!("bad {name} {s:?}"),
                })
            }
            fn opt_num<T: std::str::FromStr>(s: &str, name: &str, line: u64) -> Result<Option<T>, HarnessError> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    num(s, name, line).map(Some)
                }
            }
            let best_mse: Option<f64> = opt_num(field(5), "best_mse", line)?;
            let db: Option<f64> = opt_num(field(6), "best_mse_db", line)?;
            match (best_mse, db) {
                (Some(m), Some(d)) => {
                    if !(m >= 0.0) {
                        return Err(err(line, format!("negative MSE {m}")));
                    }
                    let want = to_db(m);
                    if !(want == d || (want - d).abs() <= 1e-9 * d.abs().max(1.0)) {
                        return Err(err(line, format!("best_mse_db {d} disagrees with best_mse {m}")));
                    }
                }
                (None, None) => {}
                _ => return Err(err(line, "best_mse and best_mse_db must both be present or empty".into())),
            }
            rows.push(ResultRow {
                dataset: field(0).to_string(),
                method: field(1).to_string(),
                arch: field(2).to_string(),
                train_size: num(field(3), "train_size", line)?,
                seed: num(field(4), "seed", line)?,
                best_mse,
                median_se: opt_num(field(7), "median_se", line)?,
                epoch_of_best: opt_num(field(8), "epoch_of_best", line)?,
                seconds: opt_num(field(9), "seconds", line)?,
                status: field(10).to_string(),
                final_mse: opt_num(field(11), "final_mse", line)?,
            });
        }
        Ok(Self { rows })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_str(&text)
    }
}

/// Writes the table as CSV with the fixed column order.
pub fn emit_csv(table: &ResultsTable, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    if table.is_empty() {
        return Err(HarnessError::EmptyTable);
    }
    let path = path.as_ref();
    std::fs::write(path, table.to_csv_string()).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}
