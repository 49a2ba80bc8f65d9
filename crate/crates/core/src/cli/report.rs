//! Output files: CSV with `#` preamble lines, or pretty JSON.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::Format;
use super::CliError;
use crate::criteria::Verdict;
use crate::simulator::Trajectory;
use crate::sweep::{SweepTable, ThresholdResult};

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))
}

pub fn path_for(dir: &Path, stem: &str, format: Format) -> PathBuf {
    dir.join(match format {
        Format::Csv => format!("{stem}.csv"),
        Format::Json => format!("{stem}.json"),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io(path, e))
}

/// CSV file whose first lines are `# key = value`.
fn csv_writer(path: &Path, preamble: &[(String, String)]) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let file = File::create(path).map_err(|e| io(path, e))?;
    let mut out = BufWriter::new(file);
    for (k, v) in preamble {
        writeln!(out, "# {k} = {v}").map_err(|e| io(path, e))?;
    }
    Ok(csv::Writer::from_writer(out))
}

fn finish(path: &Path, mut w: csv::Writer<BufWriter<File>>) -> Result<(), CliError> {
    w.flush().map_err(|e| io(path, e))
}

/// Columns: `criterion,lhs,rhs,margin,satisfied,precondition_ok,notes` (notes joined by `; `).
pub fn write_verdicts_csv(path: &Path, preamble: &[(String, String)], verdicts: &[Verdict]) -> Result<(), CliError> {
    let mut w = csv_writer(path, preamble)?;
    w.write_record([
        "criterion",
        "lhs",
        "rhs",
        "margin",
        "satisfied",
        "precondition_ok",
        "notes",
    ])
    .map_err(|e| io(path, e))?;
    for v in verdicts {
        w.write_record([
            v.criterion.to_string(),
            v.lhs.to_string(),
            v.rhs.to_string(),
            v.margin.to_string(),
            v.satisfied.to_string(),
            v.precondition_ok.to_string(),
            v.notes.join("; "),
        ])
        .map_err(|e| io(path, e))?;
    }
    finish(path, w)
}

/// Columns: `value,criterion,satisfied,lhs,rhs,margin,precondition_ok`.
pub fn write_grid_csv(path: &Path, preamble: &[(String, String)], table: &SweepTable) -> Result<(), CliError> {
    let mut w = csv_writer(path, preamble)?;
    w.write_record([
        "value",
        "criterion",
        "satisfied",
        "lhs",
        "rhs",
        "margin",
        "precondition_ok",
    ])
    .map_err(|e| io(path, e))?;
    for r in &table.rows {
        w.write_record([
            r.value.to_string(),
            r.criterion.to_string(),
            r.satisfied.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.margin.to_string(),
            r.precondition_ok.to_string(),
        ])
        .map_err(|e| io(path, e))?;
    }
    finish(path, w)
}

/// Single-record CSV from parallel header and value lists.
pub fn write_record_csv(path: &Path, preamble: &[(String, String)], fields: &[(&str, String)]) -> Result<(), CliError> {
    let mut w = csv_writer(path, preamble)?;
    w.write_record(fields.iter().map(|f| f.0)).map_err(|e| io(path, e))?;
    w.write_record(fields.iter().map(|f| f.1.as_str()))
        .map_err(|e| io(path, e))?;
    finish(path, w)
}

/// `t,x,dx` rows.
pub fn write_trajectory(path: &Path, tr: &Trajectory) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io(path, e))?;
    let mut out = BufWriter::new(file);
    tr.write_delimited(&mut out, true, ',').map_err(|e| io(path, e))?;
    out.flush().map_err(|e| io(path, e))
}

pub fn verdict_table(verdicts: &[Verdict]) -> String {
    let mut s = format!(
        "{:<18} {:>14} {:>14} {:>14}  {:<9} {}\n",
        "criterion", "lhs", "rhs", "margin", "satisfied", "precondition"
    );
    for v in verdicts {
        s.push_str(&format!(
            "{:<18} {:>14.6} {:>14.6} {:>14.6}  {:<9} {}\n",
            v.criterion.as_str(),
            v.lhs,
            v.rhs,
            v.margin,
            if v.satisfied { "yes" } else { "no" },
            if v.precondition_ok { "ok" } else { "failed" },
        ));
    }
    s
}

pub fn threshold_summary(parameter: &str, results: &[ThresholdResult]) -> String {
    let mut s = String::new();
    for r in results {
        let values: Vec<String> = r.thresholds.iter().map(|x| format!("{x:.6}")).collect();
        let direction = serde_json::to_value(r.direction)
            .ok()
            .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_string))
            .unwrap_or_default();
        s.push_str(&format!(
            "{:<18} {parameter} {:<20} {:<24} verified={}\n",
            r.criterion.as_str(),
            direction,
            if values.is_empty() {
                "-".to_string()
            } else {
                values.join(", ")
            },
            r.bracket_verified,
        ));
    }
    s
}
