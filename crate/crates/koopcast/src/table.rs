//! Rectangular result tables with CSV serialization: comma-separated,
//! header row, LF line endings, floats at 17 significant digits so doubles
//! round-trip losslessly.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum Column {
    Int(Vec<i64>),
    Float(Vec<f64>),
    Str(Vec<String>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Int(v) => v.len(),
            Column::Float(v) => v.len(),
            Column::Str(v) => v.len(),
        }
    }
}

/// Named columns, serialized row-major.
#[derive(Debug, Clone, Default)]
pub struct ResultTable {
    columns: Vec<(String, Column)>,
}

/// 17 significant digits: exact decimal round-trip for f64.
pub fn fmt_float(x: f64) -> String {
    format!("{:.16e}", x)
}

impl ResultTable {
    pub fn new() -> Self {
        ResultTable { columns: Vec::new() }
    }

    pub fn push_column(&mut self, name: &str, column: Column) -> &mut Self {
        self.columns.push((name.to_string(), column));
        self
    }

    pub fn push_int(&mut self, name: &str, values: Vec<i64>) -> &mut Self {
        self.push_column(name, Column::Int(values))
    }

    pub fn push_float(&mut self, name: &str, values: Vec<f64>) -> &mut Self {
        self.push_column(name, Column::Float(values))
    }

    pub fn push_str(&mut self, name: &str, values: Vec<String>) -> &mut Self {
        self.push_column(name, Column::Str(values))
    }

    pub fn n_rows(&self) -> Result<usize> {
        let mut rows = None;
        for (name, col) in &self.columns {
            match rows {
                None => rows = Some(col.len()),
                Some(r) if r != col.len() => {
                    return Err(Error::Config(format!(
                        "column {} has {} rows, expected {}",
                        name,
                        col.len(),
                        r
                    )))
                }
                _ => {}
            }
        }
        Ok(rows.unwrap_or(0))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = self.n_rows()?;
        if self.columns.is_empty() {
            return Err(Error::Config("refusing to write a table with no columns".into()));
        }
        let mut out = String::new();
        let header: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in 0..rows {
            for (c, (_, col)) in self.columns.iter().enumerate() {
                if c > 0 {
                    out.push(',');
                }
                match col {
                    Column::Int(v) => out.push_str(&v[r].to_string()),
                    Column::Float(v) => out.push_str(&fmt_float(v[r])),
                    Column::Str(v) => out.push_str(&v[r]),
                }
            }
            out.push('\n');
        }
        let mut file = fs::File::create(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        file.write_all(out.as_bytes()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [0.1, -1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 6.02e23, 0.0] {
            let s = fmt_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{} did not round-trip via {}", x, s);
        }
    }

    #[test]
    fn csv_shape_validation_and_output() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = ResultTable::new();
        t.push_int("j", vec![0, 1]).push_float("value", vec![1.5, 2.5]);
        t.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "j,value");
        assert!(lines.next().unwrap().starts_with("0,1.5"));
        assert!(text.ends_with('\n'));

        let mut bad = ResultTable::new();
        bad.push_int("a", vec![1]).push_int("b", vec![1, 2]);
        assert!(bad.write_csv(&path).is_err());
    }
}
