use std::io::Write;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or values; exit code 2.
    Usage(String),
    /// Failure while computing; exit code 1.
    Runtime(String),
}

/// Command output in both renderings.
pub struct Report {
    pub echo: Value,
    pub results: Value,
    pub table: Table,
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => fmt_f64(x),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

impl Table {
    /// Picks `columns` out of JSON objects.
    pub fn from_rows(columns: &[&str], rows: &[Value]) -> Self {
        Table {
            header: columns.iter().map(|c| c.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| columns.iter().map(|c| cell(&r[*c])).collect())
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: &'static str,
    command: &'a str,
    config_echo: &'a Value,
    results: &'a Value,
    timing_ms: u64,
}

pub fn write_json(
    out: &mut impl Write,
    command: &str,
    report: &Report,
    timing_ms: u64,
) -> std::io::Result<()> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        config_echo: &report.echo,
        results: &report.results,
        timing_ms,
    };
    serde_json::to_writer_pretty(&mut *out, &env)?;
    writeln!(out)
}

pub fn write_csv(out: &mut impl Write, table: &Table) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()
}
