//! Typed tables rendered as CSV, JSON or an aligned text table. All three
//! carry the same numbers; only the pretty form rounds (to 3 decimals).

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn pretty(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v:.3}"),
            Cell::Num(v) => format!("{v}"),
            other => other.csv(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // JSON has no NaN or infinity
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(v.to_string()),
            Cell::Int(v) => json!(v),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Pretty,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> = self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                    Value::Object(m)
                })
                .collect(),
        )
    }

    pub fn to_pretty(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::pretty).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|c| {
                cells.iter().map(|r| r[c].chars().count()).chain([self.columns[c].chars().count()]).max().unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, items: &[String]| {
            let parts: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &self.columns);
        let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1)));
        for r in &cells {
            line(&mut out, r);
        }
        out
    }
}

/// Key-value provenance printed ahead of every table.
pub type Metadata = Vec<(String, String)>;

/// Renders one or more named tables with a metadata header.
pub fn render(format: Format, metadata: &Metadata, tables: &[(&str, &Table)]) -> String {
    match format {
        Format::Json => {
            let meta: Map<String, Value> = metadata.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            let mut root = Map::new();
            root.insert("metadata".into(), Value::Object(meta));
            for (name, t) in tables {
                root.insert((*name).to_string(), t.to_json_rows());
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Format::Csv | Format::Pretty => {
            let mut out = String::new();
            for (k, v) in metadata {
                let _ = writeln!(out, "# {k}: {v}");
            }
            for (i, (name, t)) in tables.iter().enumerate() {
                if tables.len() > 1 {
                    if i > 0 {
                        out.push('\n');
                    }
                    let _ = writeln!(out, "# table: {name}");
                }
                out.push_str(&if format == Format::Csv { t.to_csv() } else { t.to_pretty() });
            }
            out
        }
    }
}
