//! Row tables and their CSV/JSON writers.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value as Json};

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Null,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Null, Cell::Float)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<String>> for Cell {
    fn from(s: Option<String>) -> Self {
        s.map_or(Cell::Null, Cell::Text)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Float(_) | Cell::Null => String::new(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number),
            Cell::Int(n) => Json::from(*n),
            Cell::Text(s) => Json::from(s.as_str()),
            Cell::Null => Json::Null,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::csv))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W, command: &str, config: &ExperimentConfig) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Meta<'a> {
            command: &'a str,
            version: &'a str,
            config: &'a ExperimentConfig,
        }
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let object: Map<String, Json> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                Json::Object(object)
            })
            .collect();
        let meta = Meta { command, version: env!("CARGO_PKG_VERSION"), config };
        let document = serde_json::json!({ "meta": meta, "rows": rows });
        serde_json::to_writer_pretty(&mut out, &document)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, out: W, command: &str, config: &ExperimentConfig) -> Result<(), CliError> {
        match config.format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out, command, config),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_digits_and_empty_nulls() {
        let mut table = Table::new(vec!["N", "x", "y", "note"]);
        table.push(vec![3usize.into(), 0.1.into(), Cell::Null, "gap".into()]);
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "N,x,y,note\n3,1.0000000000000001e-1,,gap\n");
        let parsed: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(parsed, 0.1);
    }
}
