use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{Error, Result};

/// Relative tolerance for recomputing a gain column from its QFI columns.
pub const GAIN_CONSISTENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Float(x) => Some(x),
            Cell::Int(i) => Some(i as f64),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            // 17 significant digits: enough to round-trip any f64
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Rows of named columns produced by one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    experiment: String,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl SweepResult {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Self { experiment: experiment.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn experiment(&self) -> &str {
        &self.experiment
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no column '{name}' in {} result", self.experiment)))
    }

    /// Numeric values of one column.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.index(name)?;
        self.rows
            .iter()
            .map(|r| r[i].as_f64().ok_or_else(|| Error::InvalidArgument(format!("column '{name}' is not numeric"))))
            .collect()
    }

    /// Row with the largest value in `name`.
    pub fn argmax(&self, name: &str) -> Result<Option<&[Cell]>> {
        let values = self.column(name)?;
        Ok(values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| self.rows[i].as_slice()))
    }

    /// Checks `gain = value / baseline − 1` on every row.
    pub fn check_gain(&self, value: &str, baseline: &str, gain: &str) -> Result<()> {
        let (h, b, g) = (self.column(value)?, self.column(baseline)?, self.column(gain)?);
        for (i, ((h, b), g)) in h.iter().zip(&b).zip(&g).enumerate() {
            let expected = h / b - 1.0;
            if (g - expected).abs() > GAIN_CONSISTENCY_TOL * expected.abs().max(1.0) {
                return Err(Error::InvalidArgument(format!("row {i}: {gain} = {g} but {value}/{baseline} - 1 = {expected}")));
            }
        }
        Ok(())
    }

    /// Checks that the listed columns are all ≥ −1e-8.
    pub fn check_nonnegative(&self, names: &[&str]) -> Result<()> {
        for name in names {
            if let Some((i, v)) = self.column(name)?.into_iter().enumerate().find(|(_, v)| !(*v >= -1e-8)) {
                return Err(Error::InvalidArgument(format!("row {i}: {name} = {v} is negative")));
            }
        }
        Ok(())
    }

    /// Distinct values of the `dim` column, ascending.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.column("dim").map(|v| v.into_iter().map(|d| d as usize).collect()).unwrap_or_default();
        dims.sort_unstable();
        dims.dedup();
        dims
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Writes `path` and the metadata sidecar `<path>.json`.
    pub fn save<C: Serialize>(&self, path: &Path, config: &C, seed: Option<u64>) -> Result<PathBuf> {
        self.write_csv(std::fs::File::create(path)?)?;
        let sidecar = sidecar_path(path);
        let meta = Metadata {
            experiment: &self.experiment,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            dims: self.dims(),
            rows: self.rows.len(),
            columns: &self.columns,
            config,
        };
        let mut f = std::fs::File::create(&sidecar)?;
        serde_json::to_writer_pretty(&mut f, &meta)?;
        writeln!(f)?;
        Ok(sidecar)
    }
}

/// `<path>.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct Metadata<'a, C: Serialize> {
    experiment: &'a str,
    version: &'a str,
    seed: Option<u64>,
    dims: Vec<usize>,
    rows: usize,
    columns: &'a [String],
    config: &'a C,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SweepResult {
        let mut r = SweepResult::new("demo", &["probe", "h", "h0", "gain", "dim"]);
        for (h, h0) in [(0.3, 0.25), (0.1 + 0.2, 0.3)] {
            r.push(vec!["coherent".into(), h.into(), h0.into(), (h / h0 - 1.0).into(), 23usize.into()]);
        }
        r
    }

    #[test]
    fn floats_round_trip_through_csv() {
        let r = sample();
        let text = r.to_csv_string().unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), vec!["probe", "h", "h0", "gain", "dim"]);
        for (rec, row) in reader.records().zip(r.rows()) {
            let rec = rec.unwrap();
            for (field, cell) in rec.iter().zip(row) {
                if let Cell::Float(x) = cell {
                    assert_eq!(field.parse::<f64>().unwrap().to_bits(), x.to_bits());
                }
            }
        }
        assert!(text.contains("3.0000000000000004e-1"));
    }

    #[test]
    fn gain_check() {
        let mut r = sample();
        r.check_gain("h", "h0", "gain").unwrap();
        r.push(vec!["coherent".into(), 1.0.into(), 0.5.into(), 0.9.into(), 23usize.into()]);
        assert!(r.check_gain("h", "h0", "gain").is_err());
    }

    #[test]
    fn argmax_and_dims() {
        let r = sample();
        let best = r.argmax("gain").unwrap().unwrap();
        assert_eq!(best[1], Cell::Float(0.3));
        assert_eq!(r.dims(), vec![23]);
        assert!(r.column("probe").is_err());
        assert!(r.column("missing").is_err());
    }

    #[test]
    fn sidecar_written_next_to_output() {
        let dir = std::env::temp_dir().join(format!("kerr-loss-table-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        let side = sample().save(&path, &serde_json::json!({"k": 1}), Some(7)).unwrap();
        assert_eq!(side, dir.join("out.csv.json"));
        let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
        assert_eq!(meta["seed"], 7);
        assert_eq!(meta["dims"], serde_json::json!([23]));
        assert_eq!(meta["config"]["k"], 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
