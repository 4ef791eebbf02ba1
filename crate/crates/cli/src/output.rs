//! Report formatting and CSV input/output.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

/// Pretty JSON with floats rounded to 12 significant digits and a trailing
/// newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::internal(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&round_value(v))
        .map_err(|e| CliError::internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Pretty JSON at full precision, for configurations that are read back.
pub fn to_json_exact<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path`, or standard output when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::internal(e.to_string())),
    }
}

fn open(path: &Path) -> Result<String, CliError> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| CliError::io(path, e))?;
    Ok(s)
}

/// Reads a one-column (real) or two-column (re, im) numeric CSV. A
/// non-numeric first row is treated as a header. Every row must have the same
/// column count.
pub fn read_complex_csv(path: &Path) -> Result<Vec<Complex64>, CliError> {
    let text = open(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    let mut width = None;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let vals = match parsed {
            Ok(v) => v,
            Err(_) if line == 0 => continue,
            Err(_) => {
                return Err(CliError::usage(format!(
                    "{}: row {} is not numeric",
                    path.display(),
                    line + 1
                )))
            }
        };
        match width {
            None if vals.len() == 1 || vals.len() == 2 => width = Some(vals.len()),
            None => {
                return Err(CliError::usage(format!(
                    "{}: expected 1 or 2 columns, found {}",
                    path.display(),
                    vals.len()
                )))
            }
            Some(w) if w != vals.len() => {
                return Err(CliError::usage(format!(
                    "{}: row {} has {} columns, expected {w}",
                    path.display(),
                    line + 1,
                    vals.len()
                )))
            }
            _ => {}
        }
        out.push(Complex64::new(vals[0], vals.get(1).copied().unwrap_or(0.0)));
    }
    if out.is_empty() {
        return Err(CliError::usage(format!("{}: no samples", path.display())));
    }
    Ok(out)
}

/// Serializes `rows` as CSV with rounded floats.
pub fn csv_string<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::internal(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::internal(e.to_string()))
}

#[derive(Serialize)]
pub struct ComplexRow {
    pub n: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Serialize)]
pub struct RealRow {
    pub n: usize,
    pub value: f64,
}

pub fn complex_rows(v: &[Complex64]) -> impl Iterator<Item = ComplexRow> + '_ {
    v.iter().enumerate().map(|(n, c)| ComplexRow {
        n,
        re: round12(c.re),
        im: round12(c.im),
    })
}

pub fn real_rows(v: &[f64]) -> impl Iterator<Item = RealRow> + '_ {
    v.iter().enumerate().map(|(n, &x)| RealRow {
        n,
        value: round12(x),
    })
}
