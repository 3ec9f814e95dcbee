//! CSV and JSON output.
//!
//! CSV is produced from the JSON form of a study report, so a stored JSON
//! report can be re-emitted as CSV without rerunning anything.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::Format;

pub const CSV_HEADER: [&str; 7] = ["method", "n", "h", "sup_error", "eoc", "target_order", "pass"];

pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

/// One row per `(method, n)` of a study report given as JSON.
pub fn study_csv(report: &Value) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    let methods = match report.get("methods") {
        Some(Value::Array(m)) => m.as_slice(),
        None => &[],
        Some(_) => bail!("'methods' is not an array"),
    };
    for m in methods {
        let rows = m.get("rows").and_then(Value::as_array).context("method without rows")?;
        for row in rows {
            w.write_record([
                cell(m.get("method")),
                cell(row.get("n")),
                cell(row.get("h")),
                cell(row.get("sup_error")),
                cell(row.get("eoc")),
                cell(m.get("target_order")),
                cell(m.get("pass")),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn render<T: Serialize>(report: &T, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => study_csv(&serde_json::to_value(report)?),
    }
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
