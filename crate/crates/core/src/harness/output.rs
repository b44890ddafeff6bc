use std::io::Write;

use serde_json::Value;

use super::config::{Experiment, Format};
use super::result::{ExperimentResult, Row};
use crate::error::{Error, Result};

pub const VARIANCE_SCAN_COLUMNS: [&str; 8] = ["N", "m", "n", "samples", "mean_G", "var_G", "var_stderr", "seed"];

pub fn write_result<W: Write>(result: &ExperimentResult, format: Format, out: W) -> Result<()> {
    match format {
        Format::Json => write_json(result, out),
        Format::Csv => write_csv(result, out),
    }
}

pub fn render(result: &ExperimentResult, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_result(result, format, &mut buf)?;
    Ok(buf)
}

fn write_json<W: Write>(result: &ExperimentResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, result).map_err(|e| Error::Data(e.to_string()))?;
    writeln!(out).map_err(io)
}

fn columns(result: &ExperimentResult) -> Vec<String> {
    if result.experiment == Experiment::VarianceScan {
        return VARIANCE_SCAN_COLUMNS.iter().map(|s| s.to_string()).collect();
    }
    let mut cols: Vec<String> = Vec::new();
    for r in &result.rows {
        for k in r.keys() {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
    }
    cols
}

fn write_csv<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let cols = columns(result);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&cols).map_err(csv_err)?;
    for r in &result.rows {
        w.write_record(cols.iter().map(|c| cell(r, c))).map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

fn cell(r: &Row, key: &str) -> String {
    match r.get(key) {
        None | Some(Value::Null) => String::new(),
        Some(Value::Number(x)) => {
            if let Some(i) = x.as_u64() {
                i.to_string()
            } else if let Some(i) = x.as_i64() {
                i.to_string()
            } else {
                // Plain decimal, shortest representation that round-trips.
                format!("{}", x.as_f64().unwrap_or(f64::NAN))
            }
        }
        Some(Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Data(e.to_string())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(e.to_string())
}
