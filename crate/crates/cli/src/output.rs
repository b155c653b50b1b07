use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// A command result: the JSON document plus a flat or tabular view for the
/// other formats.
pub struct Report {
    pub json: Value,
    pub view: View,
}

pub enum View {
    /// Key/value pairs, one record.
    Fields(Vec<(String, String)>),
    /// Header and rows.
    Rows(Vec<String>, Vec<Vec<String>>),
    /// Preformatted output per format.
    Text { csv: String, table: String },
}

impl Report {
    pub fn new<T: Serialize>(doc: &T, view: View) -> Report {
        Report {
            json: to_value(doc),
            view,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => render_json(&self.json),
            Format::Csv => match &self.view {
                View::Fields(fields) => {
                    let (keys, vals): (Vec<_>, Vec<_>) = fields.iter().cloned().unzip();
                    csv_lines(&keys, &[vals])
                }
                View::Rows(header, rows) => csv_lines(header, rows),
                View::Text { csv, .. } => csv.clone(),
            },
            Format::Table => match &self.view {
                View::Fields(fields) => {
                    let width = fields.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
                    let mut out = String::new();
                    for (k, v) in fields {
                        let _ = writeln!(out, "{k:<width$}  {v}");
                    }
                    out
                }
                View::Rows(header, rows) => aligned(header, rows),
                View::Text { table, .. } => table.clone(),
            },
        }
    }
}

/// Documents go through `Value`, whose maps are key-sorted, so parsing the
/// output and printing it again reproduces it byte for byte.
pub fn to_value<T: Serialize>(doc: &T) -> Value {
    serde_json::to_value(doc).expect("result documents serialize")
}

pub fn render_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

fn csv_lines(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(|r| r.as_slice())) {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn field(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

pub fn opt<T: ToString>(value: &Option<T>) -> String {
    value.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}
