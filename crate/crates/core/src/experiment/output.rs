//! CSV tables, plot series and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::ExperimentConfig;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Decimal rendering with 17 significant digits, which round-trips every `f64`.
/// Magnitudes outside `[1e-5, 1e17)` use exponent notation.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, v)
    } else {
        sci
    }
}

fn render_cell(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Num(v) => format_number(*v),
        Cell::Text(t) => {
            if t.contains([',', '"', '\n']) {
                format!("\"{}\"", t.replace('"', "\"\""))
            } else {
                t.clone()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(render_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Column by header name, numeric cells only.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows
            .iter()
            .map(|r| match &r[i] {
                Cell::Num(v) => Some(*v),
                Cell::Int(v) => Some(*v as f64),
                Cell::Text(_) => None,
            })
            .collect()
    }
}

/// An `(x, y)` series for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl PlotSeries {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", self.x_label, self.y_label);
        for (x, y) in &self.points {
            let _ = writeln!(out, "{},{}", format_number(*x), format_number(*y));
        }
        out
    }
}

/// Everything a run produces, before anything touches the disk.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub command: String,
    pub tables: Vec<Table>,
    /// Headline numbers (limits, predictions, gaps).
    pub summary: BTreeMap<String, f64>,
    /// Certified or estimated error bounds attached to the headline numbers.
    pub error_bounds: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    code_version: &'a str,
    created_unix_seconds: u64,
    files: Vec<String>,
    summary: BTreeMap<String, String>,
    error_bounds: BTreeMap<String, String>,
    config: &'a ExperimentConfig,
}

/// Writes each table as `<name>.csv`, each plot series as `plot_<name>.csv`
/// and a `manifest.toml`, all inside `dir`. Returns the written paths.
pub fn write_artifacts(
    out: &RunOutput,
    series: &[PlotSeries],
    config: &ExperimentConfig,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for t in &out.tables {
        let path = dir.join(format!("{}.csv", t.name));
        fs::write(&path, t.to_csv())?;
        files.push(path);
    }
    for s in series {
        let path = dir.join(format!("plot_{}.csv", s.name));
        fs::write(&path, s.to_csv())?;
        files.push(path);
    }
    let fmt_map =
        |m: &BTreeMap<String, f64>| m.iter().map(|(k, v)| (k.clone(), format_number(*v))).collect::<BTreeMap<_, _>>();
    let manifest = Manifest {
        command: &out.command,
        code_version: env!("CARGO_PKG_VERSION"),
        created_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        files: files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
        summary: fmt_map(&out.summary),
        error_bounds: fmt_map(&out.error_bounds),
        config,
    };
    let text = toml::to_string(&manifest).map_err(|e| crate::Error::Io(format!("manifest: {e}")))?;
    let path = dir.join("manifest.toml");
    fs::write(&path, text)?;
    files.push(path);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1.0000000000000000");
        assert_eq!(format_number(0.1), "0.10000000000000001");
        assert_eq!(format_number(2.0f64.ln()), "0.69314718055994529");
        assert_eq!(format_number(1e-7), "9.9999999999999995e-8");
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![Cell::Text("x,y".into()), 3usize.into()]);
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",3\n");
    }

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let s = format_number(v);
            prop_assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }
}
