use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qpea_risk::fmt_f64;

use crate::args::Format;
use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "QPEA_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(*v),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => fmt_f64(*v),
            Cell::Float(_) | Cell::Empty => "null".into(),
            Cell::Text(s) => serde_json::to_string(s).expect("strings serialize"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Rows under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = self.columns.join(",");
                s.push('\n');
                for row in &self.rows {
                    let fields: Vec<String> = row.iter().map(Cell::csv).collect();
                    s.push_str(&fields.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let objects: Vec<String> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let fields: Vec<String> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| format!("\"{c}\":{}", v.json()))
                            .collect();
                        format!("  {{{}}}", fields.join(","))
                    })
                    .collect();
                format!("[\n{}\n]\n", objects.join(",\n"))
            }
        }
    }
}

/// `None` means stdout. The env directory applies only without an explicit path.
pub fn destination(explicit: Option<&Path>, command: &str, format: Format) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{command}.{}", format.extension())))
    })
}

/// Writes `body` to `dest` or stdout. Empty results are refused before any
/// file is touched.
pub fn emit(body: &str, rows: usize, dest: Option<&Path>) -> Result<(), CliError> {
    if rows == 0 {
        return Err(CliError::Usage("no results to write".into()));
    }
    match dest {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::Output(path.to_path_buf(), e))?;
            }
            fs::write(path, body).map_err(|e| CliError::Output(path.to_path_buf(), e))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Output(PathBuf::from("<stdout>"), e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_share_fields() {
        let mut t = Table::new(&["m", "loss", "risk", "omega"]);
        t.push(vec![2u32.into(), "holevo".into(), 0.5.into(), Cell::Empty]);
        assert_eq!(
            t.render(Format::Csv),
            "m,loss,risk,omega\n2,holevo,5.0000000000000000e-1,\n"
        );
        let json: serde_json::Value = serde_json::from_str(&t.render(Format::Json)).unwrap();
        assert_eq!(json[0]["risk"], 0.5);
        assert!(json[0]["omega"].is_null());
    }

    #[test]
    fn floats_round_trip() {
        for v in [
            0.1,
            1.0 / 3.0,
            2.0 - 2.0 * (std::f64::consts::PI / 5.0).cos(),
            1e-300,
            -7.25e12,
        ] {
            let s = Cell::Float(v).csv();
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(Cell::Float(s.parse().unwrap()).csv(), s);
        }
    }

    #[test]
    fn text_is_quoted_when_needed() {
        assert_eq!(Cell::from("a,b").csv(), "\"a,b\"");
        assert_eq!(Cell::from("one_zero(eps=0.1)").csv(), "one_zero(eps=0.1)");
    }

    #[test]
    fn empty_results_create_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        assert!(emit("m\n", 0, Some(&path)).is_err());
        assert!(!path.exists());
    }
}
