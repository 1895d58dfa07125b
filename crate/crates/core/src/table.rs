//! Homogeneous result tables and their CSV/JSON encodings.
//!
//! Reals are written with 17 significant digits so that parsing a table back
//! reproduces every `f64` bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    /// Missing value: an empty CSV field, `null` in JSON.
    Null,
}

impl Cell {
    fn render_text(&self) -> String {
        match self {
            Cell::Real(x) => format_real(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Null => String::new(),
        }
    }

    /// Inverse of the CSV rendering. Text that reads as a number or boolean
    /// comes back typed.
    fn parse_text(field: &str) -> Cell {
        if field.is_empty() {
            return Cell::Null;
        }
        match field {
            "true" => return Cell::Bool(true),
            "false" => return Cell::Bool(false),
            _ => {}
        }
        if let Ok(i) = field.parse::<i64>() {
            return Cell::Int(i);
        }
        match field.parse::<f64>() {
            Ok(x) => Cell::Real(x),
            Err(_) => Cell::Text(field.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
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

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Null, Cell::Real)
    }
}

/// 17 significant digits in scientific notation; `NaN`, `inf`, `-inf` for
/// non-finite values.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Vector rendered as `;`-separated reals.
pub fn format_vector(v: &[f64]) -> String {
    v.iter().map(|x| format_real(*x)).collect::<Vec<_>>().join(";")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown output format {other:?} (expected csv or json)"))),
        }
    }
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

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => Ok(self.render_json()),
        }
    }

    fn render_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render_text)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
    }

    fn render_json(&self) -> String {
        // Written by hand so reals keep their 17-digit form.
        let key = |k: &str| Value::String(k.to_string()).to_string();
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (col, cell)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let value = match cell {
                    Cell::Real(x) if x.is_finite() => format_real(*x),
                    Cell::Real(x) => key(&format_real(*x)),
                    Cell::Int(n) => n.to_string(),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Text(s) => key(s),
                    Cell::Null => "null".into(),
                };
                let _ = write!(out, "{}: {}", key(col), value);
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }

    pub fn parse(text: &str, format: Format) -> Result<Self> {
        match format {
            Format::Csv => Self::parse_csv(text),
            Format::Json => Self::parse_json(text),
        }
    }

    fn parse_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let columns: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let mut table = Table::new::<String>(columns);
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            table.push(rec.iter().map(Cell::parse_text).collect())?;
        }
        Ok(table)
    }

    /// Column order is taken from the first object; an empty array has no
    /// columns.
    fn parse_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let objects = value
            .as_array()
            .ok_or_else(|| Error::Config("JSON table must be an array".into()))?;
        let mut table = Table::default();
        for (i, obj) in objects.iter().enumerate() {
            let obj = obj
                .as_object()
                .ok_or_else(|| Error::Config(format!("row {i} is not an object")))?;
            if i == 0 {
                table.columns = obj.keys().cloned().collect();
            }
            let row = table
                .columns
                .iter()
                .map(|c| {
                    let v = obj
                        .get(c)
                        .ok_or_else(|| Error::Config(format!("row {i} lacks column {c:?}")))?;
                    json_cell(v)
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }
}

fn json_cell(v: &Value) -> Result<Cell> {
    Ok(match v {
        Value::Null => Cell::Null,
        Value::Bool(b) => Cell::Bool(*b),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Cell::Int(i),
            None => Cell::Real(n.as_f64().ok_or_else(|| Error::Config(format!("bad number {n}")))?),
        },
        Value::String(s) => match s.as_str() {
            "NaN" => Cell::Real(f64::NAN),
            "inf" => Cell::Real(f64::INFINITY),
            "-inf" => Cell::Real(f64::NEG_INFINITY),
            _ => Cell::Text(s.clone()),
        },
        other => return Err(Error::Config(format!("unsupported JSON value {other}"))),
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// Write the rendered table to `path`.
pub fn emit_table(table: &Table, format: Format, path: &Path) -> Result<()> {
    let text = table.render(format)?;
    fs::write(path, text).map_err(|e| Error::Config(format!("writing {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(["a", "b"]);
        assert_eq!(t.render(Format::Csv).unwrap(), "a,b\n");
        assert_eq!(t.render(Format::Json).unwrap(), "[]\n");
    }

    #[test]
    fn one_row() {
        let mut t = Table::new(["x", "ok", "name"]);
        t.push(vec![Cell::Real(0.1), Cell::Bool(true), "a,b".into()]).unwrap();
        let csv = t.render(Format::Csv).unwrap();
        assert_eq!(csv, "x,ok,name\n1.0000000000000001e-1,true,\"a,b\"\n");
        assert_eq!(csv.lines().count(), 2);
        let json = t.render(Format::Json).unwrap();
        assert_eq!(json, "[\n  {\"x\": 1.0000000000000001e-1, \"ok\": true, \"name\": \"a,b\"}\n]\n");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = Table::new(["x"]);
        assert!(t.push(vec![Cell::Null, Cell::Null]).is_err());
    }

    #[test]
    fn format_names() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }

    #[test]
    fn emit_writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(["v"]);
        t.push(vec![Cell::Real(5.0)]).unwrap();
        emit_table(&t, Format::Csv, &path).unwrap();
        assert_eq!(fs::read_to_string(path).unwrap(), "v\n5.0000000000000000e0\n");
    }

    fn cell() -> impl Strategy<Value = Cell> {
        prop_oneof![
            any::<f64>().prop_filter("NaN breaks equality", |x| !x.is_nan()).prop_map(Cell::Real),
            any::<i64>().prop_map(Cell::Int),
            any::<bool>().prop_map(Cell::Bool),
            // text that does not read as a number, boolean, or empty field
            "[a-zA-Z_][a-zA-Z0-9_ ,;\"-]{0,12}"
                .prop_filter("reads as a literal", |s| {
                    s.parse::<f64>().is_err() && s != "true" && s != "false"
                })
                .prop_map(Cell::Text),
            Just(Cell::Null),
        ]
    }

    fn table() -> impl Strategy<Value = Table> {
        (1usize..5).prop_flat_map(|ncols| {
            (
                prop::collection::vec("[a-z_]{1,8}", ncols),
                prop::collection::vec(prop::collection::vec(cell(), ncols), 0..6),
            )
                .prop_filter("unique columns", |(cols, _)| {
                    let mut c = cols.clone();
                    c.sort();
                    c.dedup();
                    c.len() == cols.len()
                })
                .prop_map(|(columns, rows)| Table { columns, rows })
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip(t in table()) {
            let back = Table::parse(&t.render(Format::Csv).unwrap(), Format::Csv).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn json_round_trip(t in table()) {
            let back = Table::parse(&t.render(Format::Json).unwrap(), Format::Json).unwrap();
            prop_assert_eq!(&back.rows, &t.rows);
            if !t.rows.is_empty() {
                prop_assert_eq!(back.columns, t.columns);
            }
        }
    }
}
