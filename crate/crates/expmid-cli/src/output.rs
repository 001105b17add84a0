//! Result serialization: fixed-format CSV and a JSON summary, both written
//! atomically (temp file + rename) so concurrent batch runs never observe
//! half-written files. Identical spec and seed produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::runner::Outcome;
use crate::spec::ExperimentSpec;
use crate::CliError;

#[derive(Serialize)]
struct ResultDoc<'a> {
    artifact_version: &'static str,
    seed: u64,
    spec: &'a ExperimentSpec,
    fitted_order: Option<f64>,
    fitted_const: Option<f64>,
    bound_check_pass: Option<bool>,
    worst_ratio: Option<f64>,
    max_growth: Option<f64>,
    oracle_n: Option<u64>,
    exact_scheme: bool,
    rows: &'a [serde_json::Value],
}

/// Resolve an output path against `--out-dir` (absolute paths win).
pub fn resolve_path(raw: &str, out_dir: Option<&Path>) -> PathBuf {
    let p = PathBuf::from(raw);
    match out_dir {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", parent.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&parent)
        .map_err(|e| CliError::Io(format!("temp file in {}: {e}", parent.display())))?;
    tmp.write_all(bytes)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("renaming into {}: {e}", path.display())))?;
    Ok(())
}

pub fn write_results(
    spec: &ExperimentSpec,
    outcome: &Outcome,
    out_dir: Option<&Path>,
) -> Result<(PathBuf, PathBuf), CliError> {
    let mut csv = String::new();
    csv.push_str(outcome.csv_header);
    csv.push('\n');
    for row in &outcome.csv_rows {
        csv.push_str(row);
        csv.push('\n');
    }

    let doc = ResultDoc {
        artifact_version: env!("CARGO_PKG_VERSION"),
        seed: spec.recorded_seed(),
        spec,
        fitted_order: outcome.fitted_order,
        fitted_const: outcome.fitted_const,
        bound_check_pass: outcome.bound_check_pass,
        worst_ratio: outcome.worst_ratio,
        max_growth: outcome.max_growth,
        oracle_n: outcome.oracle_n,
        exact_scheme: outcome.exact_scheme,
        rows: &outcome.json_rows,
    };
    let mut json = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Io(format!("serializing result document: {e}")))?;
    json.push('\n');

    let csv_path = resolve_path(&spec.output.csv_path, out_dir);
    let json_path = resolve_path(&spec.output.json_path, out_dir);
    write_atomic(&csv_path, csv.as_bytes())?;
    write_atomic(&json_path, json.as_bytes())?;
    Ok((csv_path, json_path))
}
