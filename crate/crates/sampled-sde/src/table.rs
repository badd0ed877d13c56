//! Rectangular tables and their CSV dialect: RFC 4180 quoting, one header
//! row, LF line endings, floats in shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Setup(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Column `name` parsed as floats.
    pub fn float_column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column(name)?;
        self.rows
            .iter()
            .map(|r| match &r[j] {
                Cell::Float(v) => Some(*v),
                Cell::Int(v) => Some(*v as f64),
                Cell::Text(s) => s.parse().ok(),
            })
            .collect()
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let wrap = |source| Error::Csv {
            path: "<memory>".into(),
            source,
        };
        w.write_record(&self.columns).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(wrap)?;
        }
        w.into_inner()
            .map_err(|e| Error::Setup(format!("csv buffer: {e}")))
    }
}

/// Writes `table` to `path`.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let bytes = table.to_csv_bytes()?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    file.flush().map_err(|e| Error::io(path, e))
}

/// Reads a CSV written by [`emit_csv`]. Fields that parse as integers become
/// [`Cell::Int`], other numeric fields [`Cell::Float`], the rest text.
pub fn read_csv(path: &Path) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.into(),
            source,
        })?;
    let columns = r
        .headers()
        .map_err(|source| Error::Csv {
            path: path.into(),
            source,
        })?
        .iter()
        .map(String::from)
        .collect();
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for record in r.records() {
        let record = record.map_err(|source| Error::Csv {
            path: path.into(),
            source,
        })?;
        table.rows.push(record.iter().map(parse_cell).collect());
    }
    Ok(table)
}

fn parse_cell(s: &str) -> Cell {
    if let Ok(v) = s.parse::<u64>() {
        Cell::Int(v)
    } else if let Ok(v) = s.parse::<f64>() {
        Cell::Float(v)
    } else {
        Cell::Text(s.to_string())
    }
}
