//! The `evaluate` command: predict with a stored model at new points.

use std::path::Path;

use mop_core::{Metamodel, MopError, Predictor};
use serde_json::Value;

use crate::artifacts::write_atomic;
use crate::error::{CliError, Result};

/// A model read back from `model.json`.
#[derive(Clone, Debug)]
pub struct StoredModel {
    pub model: Metamodel<f64>,
    /// Response the model was fit to, when the file carries an envelope.
    pub response: Option<String>,
}

impl StoredModel {
    /// Accepts an artifact envelope or a bare serialized metamodel.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(MopError::from)?;
        let (payload, response) = match value {
            Value::Object(mut map) if map.contains_key("payload") => {
                let response = map.get("response").and_then(Value::as_str).map(str::to_string);
                (map.remove("payload").unwrap_or(Value::Null), response)
            }
            other => (other, None),
        };
        let model = serde_json::from_value(payload).map_err(MopError::from)?;
        Ok(Self { model, response })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::from(MopError::from(e)).in_file(path))?;
        Self::from_json(&text).map_err(|e| e.in_file(path))
    }

    pub fn prediction_column(&self) -> String {
        match &self.response {
            Some(r) => format!("{r}_predicted"),
            None => "predicted".to_string(),
        }
    }
}

/// Appends a prediction column to comma-separated points. Model inputs are
/// matched to columns by name; other columns pass through untouched. An empty
/// input yields empty output.
pub fn predict_csv(stored: &StoredModel, points: &[u8]) -> Result<Vec<u8>> {
    if points.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(points);
    let header: Vec<String> = rdr.headers().map_err(MopError::from)?.iter().map(|h| h.trim().to_string()).collect();
    let expected = stored.model.variable_names();
    let positions: Option<Vec<usize>> =
        expected.iter().map(|name| header.iter().position(|h| h == name)).collect();
    let positions = positions
        .ok_or_else(|| CliError::DimensionMismatch { expected: expected.to_vec(), found: header.clone() })?;

    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut out_header = header.clone();
    out_header.push(stored.prediction_column());
    wtr.write_record(&out_header).map_err(MopError::from)?;
    let mut x = vec![0.0; positions.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(MopError::from)?;
        for (slot, &col) in x.iter_mut().zip(&positions) {
            let cell = record.get(col).unwrap_or("");
            *slot = cell
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| MopError::MalformedCell { row, col, value: cell.to_string() })?;
        }
        let value = stored.model.predict(&x)?;
        let mut fields: Vec<String> = record.iter().map(str::to_string).collect();
        fields.push(value.to_string());
        wtr.write_record(&fields).map_err(MopError::from)?;
    }
    wtr.into_inner().map_err(|e| CliError::io("flushing predictions", e.into_error()))
}

/// Reads the model and points, writes predictions to `output` or stdout.
pub fn evaluate(model_path: &Path, points_path: &Path, output: Option<&Path>) -> Result<()> {
    let stored = StoredModel::load(model_path)?;
    let points =
        std::fs::read(points_path).map_err(|e| CliError::from(MopError::from(e)).in_file(points_path))?;
    let bytes = predict_csv(&stored, &points).map_err(|e| e.in_file(points_path))?;
    match output {
        Some(path) => write_atomic(path, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| CliError::io("writing predictions", e))
        }
    }
}
