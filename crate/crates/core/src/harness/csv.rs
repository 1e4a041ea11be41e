//! Sweep CSV: `#` metadata lines, a header, one row per grid point.
//!
//! Floats are written in shortest round-trip decimal form, so parsing a file
//! back reproduces every value bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::sweep::{SweepResult, SweepRow};

pub const HEADER: &str = "esn0_db,ser,ci_low,ci_high,n_symbols,n_errors,final_train_loss";

/// Decimal notation that never drops the fractional part: `0.0`, `2.5`,
/// `0.000123`, `nan`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    let s = v.to_string();
    if v.is_finite() && !s.contains('.') {
        format!("{s}.0")
    } else {
        s
    }
}

fn format_row(row: &SweepRow) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        format_float(row.esn0_db),
        format_float(row.ser),
        format_float(row.ci_low),
        format_float(row.ci_high),
        row.n_symbols,
        row.n_errors,
        format_float(row.final_train_loss),
    )
}

/// Full file contents.
pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    for line in result.metadata_lines() {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(HEADER);
    out.push('\n');
    for row in &result.rows {
        out.push_str(&format_row(row));
        out.push('\n');
    }
    out
}

/// Writes [`to_csv`] to `path` via a sibling temporary file, so readers never
/// see a half-written table.
pub fn emit_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("csv.partial");
    fs::write(&tmp, to_csv(result)).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Data rows only.
pub fn data_rows(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty() && *l != HEADER)
        .collect()
}

/// Parses a sweep CSV back into rows; metadata lines are returned without
/// their `# ` prefix.
pub fn parse_csv(text: &str) -> Result<(Vec<SweepRow>, Vec<String>)> {
    let mut rows = Vec::new();
    let mut meta = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        let bad = |message: String| Error::Parse { line: i + 1, message };
        if let Some(m) = line.strip_prefix('#') {
            meta.push(m.strip_prefix(' ').unwrap_or(m).to_string());
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(bad(format!("expected header '{HEADER}'")));
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad(format!("expected 7 fields, got {}", f.len())));
        }
        let float = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number '{s}'")));
        let int = |s: &str| s.parse::<u64>().map_err(|_| bad(format!("bad count '{s}'")));
        rows.push(SweepRow {
            esn0_db: float(f[0])?,
            ser: float(f[1])?,
            ci_low: float(f[2])?,
            ci_high: float(f[3])?,
            n_symbols: int(f[4])?,
            n_errors: int(f[5])?,
            final_train_loss: float(f[6])?,
        });
    }
    if !seen_header {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: "missing header".into(),
        });
    }
    Ok((rows, meta))
}
