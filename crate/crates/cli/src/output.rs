//! Result tables and the record written by every command.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row} has {got} cells, header has {want}")]
    Ragged { row: usize, got: usize, want: usize },
}

/// One table cell. Floats print in shortest round-trip form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if (1e-5..1e16).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Cell {
    /// Reads a CSV field back. Only canonical spellings become numbers, so
    /// `parse(x).to_string() == x` for every field.
    pub fn parse(s: &str) -> Cell {
        if let Ok(i) = s.parse::<i64>() {
            if i.to_string() == s {
                return Cell::Int(i);
            }
        }
        if let Ok(v) = s.parse::<f64>() {
            if format_float(v) == s {
                return Cell::Float(v);
            }
        }
        Cell::Text(s.to_string())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(i) => Some(i as f64),
            Cell::Float(v) => Some(v),
            Cell::Text(_) => None,
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(v) => f.write_str(&format_float(*v)),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        i64::try_from(v).map(Cell::Int).unwrap_or_else(|_| Cell::Text(v.to_string()))
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        // Writing to a Vec cannot fail.
        w.write_record(&self.columns).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv of utf-8 fields")
    }

    pub fn from_csv(data: &str) -> Result<Table, TableError> {
        let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(data.as_bytes());
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != columns.len() {
                return Err(TableError::Ragged { row: i + 1, got: rec.len(), want: columns.len() });
            }
            rows.push(rec.iter().map(Cell::parse).collect());
        }
        Ok(Table { columns, rows })
    }

    /// Space-aligned text, numbers right-aligned.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> =
            self.rows.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, h)| cells.iter().map(|r| r[j].chars().count()).fold(h.chars().count(), usize::max))
            .collect();
        let numeric: Vec<bool> = (0..self.columns.len())
            .map(|j| !self.rows.is_empty() && self.rows.iter().all(|r| !matches!(r[j], Cell::Text(_))))
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, fields: &[String]| {
            let parts: Vec<String> = fields
                .iter()
                .enumerate()
                .map(|(j, f)| if numeric[j] { format!("{f:>w$}", w = widths[j]) } else { format!("{f:<w$}", w = widths[j]) })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &self.columns);
        for r in &cells {
            line(&mut out, r);
        }
        out
    }
}

/// Everything one command produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Canonical command line that reproduces the results.
    pub command: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Only filled with `--timing`, so that outputs stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub parameters: Map<String, Value>,
    pub table: Table,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Table>,
}

impl OutputRecord {
    pub fn new(command: String, parameters: Map<String, Value>, table: Table) -> Self {
        OutputRecord {
            command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            wall_time_s: None,
            parameters,
            table,
            terms: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serialises");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n", self.command);
        if let Some(t) = self.wall_time_s {
            let _ = writeln!(out, "# wall time {t:.3} s");
        }
        out.push_str(&self.table.to_text());
        if let Some(terms) = &self.terms {
            out.push('\n');
            out.push_str(&terms.to_text());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_spelling() {
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(1.2e-9), "1.2e-9");
        assert_eq!(format_float(3e20), "3e20");
        assert_eq!(Cell::parse("0.5"), Cell::Float(0.5));
        assert_eq!(Cell::parse("12"), Cell::Int(12));
        assert_eq!(Cell::parse("012"), Cell::Text("012".into()));
        assert_eq!(Cell::parse("1.50"), Cell::Text("1.50".into()));
        assert_eq!(Cell::parse("pos"), Cell::Text("pos".into()));
    }

    #[test]
    fn text_alignment() {
        let mut t = Table::new(&["variant", "p"]);
        t.push(vec!["pos".into(), 0.25.into()]);
        t.push(vec!["std".into(), 1e-7.into()]);
        assert_eq!(t.to_text(), "variant     p\npos      0.25\nstd      1e-7\n");
    }

    #[test]
    fn ragged_csv_rejected() {
        assert!(matches!(Table::from_csv("a,b\n1\n"), Err(TableError::Ragged { .. })));
        assert!(Table::from_csv("").unwrap().columns.is_empty());
    }

    fn cell() -> impl Strategy<Value = Cell> {
        prop_oneof![
            any::<i64>().prop_map(Cell::Int),
            any::<f64>().prop_map(Cell::Float),
            "[a-z0-9 ,\"._-]{1,12}".prop_map(Cell::Text),
        ]
    }

    fn table() -> impl Strategy<Value = Table> {
        (1usize..6).prop_flat_map(|cols| {
            (
                proptest::collection::vec("[a-z_]{1,8}", cols),
                proptest::collection::vec(proptest::collection::vec(cell(), cols), 0..8),
            )
                .prop_map(|(columns, rows)| Table { columns, rows })
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_byte_identical(t in table()) {
            let csv = t.to_csv();
            let back = Table::from_csv(&csv).unwrap();
            prop_assert_eq!(back.to_csv(), csv);
        }
    }
}
