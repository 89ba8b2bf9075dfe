//! Tabular output documents and their CSV and JSON encodings.
//!
//! CSV files start with `#`-prefixed lines holding a JSON metadata object,
//! followed by a column-name row and data rows with 17 significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::config::Format;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Num(x.unwrap_or(f64::NAN))
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Num(x) if x.is_finite() => s.serialize_f64(*x),
            Cell::Num(_) => s.serialize_none(),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Text(t) => t.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

/// One output table with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    /// Suggested file name without extension, when the command writes several.
    pub name: String,
    pub meta: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Serialize for Document {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("meta", &self.meta)?;
        m.serialize_entry("columns", &self.columns)?;
        m.serialize_entry("rows", &self.rows)?;
        m.end()
    }
}

impl Document {
    pub fn new(name: impl Into<String>, meta: Value, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            meta,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn text_column(&self, name: &str) -> Option<Vec<String>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].csv()).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# {}", serde_json::to_string(&self.meta)?)?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, w: W, format: Format) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }

    pub fn to_string(&self, format: Format) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf, format)?;
        Ok(String::from_utf8(buf).expect("output is UTF-8"))
    }
}

pub fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Writes documents to `out`. A single document goes to `out` itself; several
/// go to `out` with `_<k>` inserted before the extension, `k` from 1.
pub fn write_documents(docs: &[Document], out: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let paths: Vec<PathBuf> = if docs.len() == 1 {
        vec![out.to_path_buf()]
    } else {
        let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let ext = out
            .extension()
            .map(|e| e.to_string_lossy().into_owned())
            .unwrap_or_else(|| extension(format).to_string());
        (1..=docs.len())
            .map(|k| out.with_file_name(format!("{stem}_{k}.{ext}")))
            .collect()
    };
    for (doc, path) in docs.iter().zip(&paths) {
        write_file(doc, path, format)?;
    }
    Ok(paths)
}

/// Writes each document to `<dir>/<name>.<ext>`.
pub fn write_named(docs: &[Document], dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(docs.len());
    for doc in docs {
        let path = dir.join(format!("{}.{}", doc.name, extension(format)));
        write_file(doc, &path, format)?;
        paths.push(path);
    }
    Ok(paths)
}

fn write_file(doc: &Document, path: &Path, format: Format) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    doc.write(&mut f, format)?;
    f.flush()?;
    Ok(())
}

/// Parses a CSV document written by [`Document::write_csv`].
pub fn read_csv(text: &str) -> Result<Document> {
    let bad = |m: &str| crate::error::Error::Config(format!("malformed csv: {m}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty"))?;
    let meta: Value = serde_json::from_str(header.strip_prefix("# ").ok_or_else(|| bad("no header"))?)?;
    let columns: Vec<String> = lines
        .next()
        .ok_or_else(|| bad("no column row"))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| c.parse::<f64>().map(Cell::Num).unwrap_or_else(|_| Cell::Text(c.to_string())))
                .collect()
        })
        .collect();
    Ok(Document {
        name: String::new(),
        meta,
        columns,
        rows,
    })
}
