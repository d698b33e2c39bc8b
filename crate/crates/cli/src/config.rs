//! Run configuration: a single JSON document, optionally patched by flags.

use std::path::{Path, PathBuf};

use mop_core::sensitivity::MIN_BASE_SAMPLES;
use mop_core::{ModelKind, MopOptions, SearchSpace, ValidationScheme};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Benchmark functions that can stand in for a data file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    /// `sin x1 + 7 sin² x2 + 0.1 x3⁴ sin x1` on `[-π, π]³`.
    #[value(name = "ishigami")]
    Ishigami,
    /// `2 x1 + 4 x2 + 0.5 x1² + x1 x2` with standard normal inputs.
    #[value(name = "quad2d")]
    Quad2d,
    /// The quad2d response over eight standard normal inputs plus small noise.
    #[value(name = "active2of8")]
    Active2of8,
}

/// Where the samples come from. Exactly one of `csv` and `builtin` is set;
/// `n` is the sample count of a builtin.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeConfig {
    CrossValidation { q: usize },
    /// `fraction` of the samples trains the model, the rest tests it.
    Split { fraction: f64 },
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig::CrossValidation { q: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub quantiles: Vec<f64>,
    pub coi_mins: Vec<f64>,
    pub kinds: Vec<ModelKind>,
    pub include_unfiltered: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let s = SearchSpace::default();
        Self { quantiles: s.quantiles, coi_mins: s.coi_mins, kinds: s.kinds, include_unfiltered: s.include_unfiltered }
    }
}

impl From<&SearchConfig> for SearchSpace {
    fn from(c: &SearchConfig) -> Self {
        SearchSpace {
            quantiles: c.quantiles.clone(),
            coi_mins: c.coi_mins.clone(),
            kinds: c.kinds.clone(),
            include_unfiltered: c.include_unfiltered,
        }
    }
}

/// Seeds of the three random streams of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    /// Latin hypercube sampling of builtin inputs (and their noise).
    pub data: u64,
    /// Cross-validation partition or split, and MLS radius selection.
    pub validation: u64,
    /// Base matrices of the variance-based index estimator.
    pub sensitivity: u64,
}

impl Seeds {
    pub fn all(seed: u64) -> Self {
        Self { data: seed, validation: seed, sensitivity: seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputConfig,
    /// Response columns to model. Defaults to `["y"]` for builtins.
    pub responses: Vec<String>,
    pub scheme: SchemeConfig,
    pub search: SearchConfig,
    pub delta_cop: f64,
    pub seeds: Seeds,
    pub sensitivity_samples: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let options = MopOptions::<f64>::default();
        Self {
            input: InputConfig::default(),
            responses: Vec::new(),
            scheme: SchemeConfig::default(),
            search: SearchConfig::default(),
            delta_cop: options.delta_cop,
            seeds: Seeds::default(),
            sensitivity_samples: options.sensitivity_samples,
            output_dir: PathBuf::from("mop-output"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Response names with the builtin default applied.
    pub fn response_names(&self) -> Vec<String> {
        if self.responses.is_empty() && self.input.builtin.is_some() {
            vec!["y".to_string()]
        } else {
            self.responses.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.input.csv, self.input.builtin, self.input.n) {
            (Some(_), Some(_), _) | (None, None, _) => {
                return Err(CliError::config("input", "exactly one of `csv` and `builtin` must be given"))
            }
            (Some(_), None, Some(_)) => return Err(CliError::config("input.n", "only applies to builtin inputs")),
            (None, Some(_), None) => return Err(CliError::config("input.n", "builtin inputs need a sample count")),
            (None, Some(_), Some(0)) => return Err(CliError::config("input.n", "must be positive")),
            _ => {}
        }
        let responses = self.response_names();
        if responses.is_empty() {
            return Err(CliError::config("responses", "at least one response column is required"));
        }
        for (k, name) in responses.iter().enumerate() {
            let bad = name.is_empty() || name == "." || name == ".." || name.contains(['/', '\\']);
            if bad {
                return Err(CliError::config(format!("responses[{k}]"), format!("`{name}` is not usable as a directory name")));
            }
            if responses[..k].contains(name) {
                return Err(CliError::config(format!("responses[{k}]"), format!("duplicate response `{name}`")));
            }
        }
        match self.scheme {
            SchemeConfig::CrossValidation { q } if !(2..=10).contains(&q) => {
                return Err(CliError::config("scheme.q", format!("must lie in [2, 10], got {q}")))
            }
            SchemeConfig::Split { fraction } if !(fraction > 0.0 && fraction < 1.0) => {
                return Err(CliError::config("scheme.fraction", format!("must lie in (0, 1), got {fraction}")))
            }
            _ => {}
        }
        SearchSpace::from(&self.search).validate().map_err(|e| CliError::config("search", e.to_string()))?;
        if !(self.delta_cop.is_finite() && self.delta_cop >= 0.0) {
            return Err(CliError::config("delta_cop", format!("must be a finite value >= 0, got {}", self.delta_cop)));
        }
        if self.sensitivity_samples < MIN_BASE_SAMPLES {
            return Err(CliError::config(
                "sensitivity_samples",
                format!("must be at least {MIN_BASE_SAMPLES}, got {}", self.sensitivity_samples),
            ));
        }
        Ok(())
    }

    pub fn mop_options(&self) -> MopOptions<f64> {
        let scheme = match self.scheme {
            SchemeConfig::CrossValidation { q } => ValidationScheme::CrossValidation { q, seed: self.seeds.validation },
            SchemeConfig::Split { fraction } => {
                ValidationScheme::Split { train_fraction: fraction, seed: self.seeds.validation }
            }
        };
        MopOptions {
            search: SearchSpace::from(&self.search),
            scheme,
            delta_cop: self.delta_cop,
            sensitivity_samples: self.sensitivity_samples,
            sensitivity_seed: self.seeds.sensitivity,
            ..MopOptions::default()
        }
    }

    /// SHA-256 of the sorted-key JSON form of every field that affects results.
    /// The output directory is left out so relocated runs hash alike.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let serde_json::Value::Object(map) = &mut value {
            map.remove("output_dir");
        }
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}
