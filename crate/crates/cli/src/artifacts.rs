//! Artifact envelopes, plot-data tables and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use mop_core::{DesignTable, Metamodel, Mop, Predictor, SensitivityReport};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Seeds;
use crate::error::{CliError, Result};

/// Bumped whenever the layout of any artifact changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Points per axis of the metamodel grid.
pub const GRID_STEPS: usize = 41;

pub const MOP_RESULT: &str = "mop_result.json";
pub const QUALITY_REPORT: &str = "quality_report.json";
pub const SENSITIVITY: &str = "sensitivity.json";
pub const MODEL: &str = "model.json";
pub const SCATTER: &str = "scatter.tsv";
pub const GRID: &str = "grid.tsv";

/// Provenance shared by every artifact of a run.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub config_hash: String,
    pub seeds: Seeds,
}

/// Wraps `payload` with its schema name, version and provenance. Object keys
/// come out sorted because `serde_json::Map` is ordered.
pub fn envelope(artifact: &str, response: &str, provenance: &Provenance, payload: &impl Serialize) -> Result<Value> {
    let payload = serde_json::to_value(payload).map_err(|e| CliError::Data(e.into()))?;
    Ok(json!({
        "artifact": artifact,
        "schema_version": SCHEMA_VERSION,
        "config_hash": provenance.config_hash,
        "seeds": provenance.seeds,
        "response": response,
        "payload": payload,
    }))
}

pub fn to_json_bytes(value: &Value) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    text.into_bytes()
}

/// `row`, observed and held-out predicted response for every validated sample.
pub fn scatter_tsv(y: &[f64], predictions: &[(usize, f64)]) -> String {
    let mut out = String::from("row\tobserved\tpredicted\n");
    for &(j, p) in predictions {
        writeln!(out, "{j}\t{}\t{p}", y[j]).unwrap();
    }
    out
}

/// Metamodel values over the two retained variables with the largest scaled
/// total-effect index (one if only one is retained), spanning their sampled
/// ranges. The other retained inputs sit at their sample means.
pub fn grid_tsv(model: &Metamodel<f64>, table: &DesignTable<f64>, sensitivity: &SensitivityReport<f64>) -> Result<String> {
    let retained = model.variable_indices();
    let axes: Vec<usize> = sensitivity
        .ranked()
        .into_iter()
        .filter_map(|(_, v)| retained.iter().position(|&r| r == v.index))
        .take(2)
        .collect();
    let mut base: Vec<f64> = retained
        .iter()
        .map(|&i| {
            let c = table.column(i);
            c.iter().sum::<f64>() / c.len() as f64
        })
        .collect();
    let ticks: Vec<Vec<f64>> = axes
        .iter()
        .map(|&k| {
            let c = table.column(retained[k]);
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (0..GRID_STEPS).map(|s| lo + (hi - lo) * s as f64 / (GRID_STEPS - 1) as f64).collect()
        })
        .collect();

    let names = model.variable_names();
    let mut out = String::new();
    for &k in &axes {
        write!(out, "{}\t", names[k]).unwrap();
    }
    out.push_str("predicted\n");
    let mut points = Vec::new();
    match axes.as_slice() {
        [a] => {
            for &u in &ticks[0] {
                base[*a] = u;
                points.push(base.clone());
            }
        }
        [a, b] => {
            for &u in &ticks[0] {
                for &v in &ticks[1] {
                    base[*a] = u;
                    base[*b] = v;
                    points.push(base.clone());
                }
            }
        }
        _ => {}
    }
    let values = model.predict_rows(&points)?;
    for (x, value) in points.iter().zip(values) {
        for &k in &axes {
            write!(out, "{}\t", x[k]).unwrap();
        }
        writeln!(out, "{value}").unwrap();
    }
    Ok(out)
}

/// Sensitivity ranking with text bars scaled to the unit interval.
pub fn bar_table(mop: &Mop<f64>) -> String {
    const WIDTH: usize = 40;
    let r = &mop.result;
    let mut out = format!(
        "response `{}`: {} on [{}], CoP {:.4}\n",
        r.response,
        r.model_kind,
        r.retained_names.join(", "),
        r.cop
    );
    let name_width = r.sensitivity.per_variable.keys().map(String::len).max().unwrap_or(0).max(8);
    writeln!(out, "  {:<name_width$}  {:>7}  {:>7}", "variable", "scaled", "total").unwrap();
    for (name, v) in r.sensitivity.ranked() {
        let filled = (v.total_index_scaled.clamp(0.0, 1.0) * WIDTH as f64).round() as usize;
        writeln!(
            out,
            "  {name:<name_width$}  {:>7.4}  {:>7.4}  {}",
            v.total_index_scaled,
            v.total_index,
            "#".repeat(filled)
        )
        .unwrap();
    }
    out
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let context = || format!("writing {}", path.display());
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(context(), e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(context(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(context(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(context(), e.error))?;
    Ok(())
}
