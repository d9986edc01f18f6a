//! Datasets and their CSV / JSON-lines encodings.

use crate::args::Format;
use crate::error::CliError;
use serde::Serialize;
use serde_json::{Map, Number, Value};
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
    S(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::I(i64::from(v))
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            // Shortest round-trip form, with an exponent for very small or large values.
            Cell::F(v) => Number::from_f64(*v).map_or_else(|| v.to_string(), |n| n.to_string()),
            Cell::I(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(v) => v.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::I(v) => Value::from(*v),
            Cell::B(v) => Value::Bool(*v),
            Cell::S(v) => Value::String(v.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

/// Columns plus rows; the last column is always `error`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    failures: usize,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        let mut columns = columns.to_vec();
        columns.push("error");
        Table { columns, rows: Vec::new(), failures: 0 }
    }

    /// Appends a row given as `(column, value)` pairs; unnamed columns stay empty.
    pub fn push(&mut self, cells: Vec<(&'static str, Cell)>) {
        let mut row = vec![Cell::Empty; self.columns.len()];
        for (name, cell) in cells {
            let i = self.index(name);
            row[i] = cell;
        }
        if row[self.columns.len() - 1] != Cell::Empty {
            self.failures += 1;
        }
        self.rows.push(row);
    }

    /// Appends a row recording a failed point.
    pub fn push_error(&mut self, mut cells: Vec<(&'static str, Cell)>, err: impl ToString) {
        cells.push(("error", Cell::S(err.to_string())));
        self.push(cells);
    }

    pub fn extend(&mut self, other: Table) {
        debug_assert_eq!(self.columns, other.columns);
        self.failures += other.failures;
        self.rows.extend(other.rows);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    fn index(&self, name: &str) -> usize {
        self.columns.iter().position(|c| *c == name).unwrap_or_else(|| panic!("unknown column `{name}`"))
    }
}

/// Provenance block written before the rows.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub profile: String,
    pub period: f64,
    pub units: &'static str,
    pub config_sha256: String,
}

pub fn write(out: &mut dyn Write, format: Format, header: &Header, table: &Table) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let value = serde_json::to_value(header)?;
            for (key, v) in value.as_object().into_iter().flatten() {
                let text = v.as_str().map_or_else(|| v.to_string(), str::to_owned);
                writeln!(out, "# {key}: {text}")?;
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::text))?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut head = Map::new();
            head.insert("header".into(), serde_json::to_value(header)?);
            writeln!(out, "{}", Value::Object(head))?;
            for row in &table.rows {
                let obj: Map<String, Value> =
                    table.columns.iter().zip(row).map(|(c, cell)| ((*c).to_owned(), cell.json())).collect();
                writeln!(out, "{}", Value::Object(obj))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> Header {
        Header {
            tool: "bloch1d",
            version: "0",
            command: "test",
            profile: "preset:graded".into(),
            period: 1.0,
            units: "nondimensional",
            config_sha256: "00".into(),
        }
    }

    fn sample() -> Table {
        let mut t = Table::new(&["x", "label"]);
        t.push(vec![("x", 0.5.into()), ("label", "a,b".into())]);
        t.push_error(vec![("x", f64::NAN.into())], "bad point");
        t
    }

    #[test]
    fn csv_quotes_and_keeps_column_order() {
        let mut buf = Vec::new();
        write(&mut buf, Format::Csv, &header(), &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec!["x,label,error", "0.5,\"a,b\",", "NaN,,bad point"]);
        assert!(text.contains("# config_sha256: 00"));
    }

    #[test]
    fn jsonl_rows_are_objects_in_column_order() {
        let mut buf = Vec::new();
        write(&mut buf, Format::Jsonl, &header(), &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("{\"header\":{\"tool\":\"bloch1d\""));
        assert_eq!(lines[1], r#"{"x":0.5,"label":"a,b","error":null}"#);
        assert_eq!(lines[2], r#"{"x":null,"label":null,"error":"bad point"}"#);
    }

    #[test]
    fn failures_are_counted() {
        assert_eq!(sample().failures(), 1);
    }
}
