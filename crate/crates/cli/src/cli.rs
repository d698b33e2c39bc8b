//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mop_core::ModelKind;

use crate::config::{Builtin, InputConfig, RunConfig, SchemeConfig, Seeds};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "mop", version, about = "Metamodel of Optimal Prognosis: surrogate selection and sensitivity ranking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search the MOP for each response and write artifacts.
    Run(RunArgs),
    /// Predict with a stored model at the points of a CSV file.
    Evaluate(EvaluateArgs),
}

/// Flags override the matching fields of the `--config` document.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Samples from a CSV file with a header row.
    #[arg(long, value_name = "FILE", conflicts_with = "builtin")]
    pub csv: Option<PathBuf>,
    /// Samples from a builtin benchmark function.
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Sample count of a builtin.
    #[arg(long)]
    pub n: Option<usize>,
    /// Response column; repeat for several.
    #[arg(long = "response", value_name = "NAME")]
    pub responses: Vec<String>,
    /// Cross-validation with this many subsets.
    #[arg(long, value_name = "Q", conflicts_with = "split")]
    pub folds: Option<usize>,
    /// Single split with this training fraction.
    #[arg(long, value_name = "FRACTION")]
    pub split: Option<f64>,
    #[arg(long, value_name = "X")]
    pub delta_cop: Option<f64>,
    /// Seed for every random stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Base sample count of the index estimator.
    #[arg(long, value_name = "N")]
    pub sensitivity_samples: Option<usize>,
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub quantiles: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub coi_mins: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_name = "LIST", value_parser = parse_kind)]
    pub kinds: Vec<ModelKind>,
    /// Skip the configurations that fit every kind on all inputs.
    #[arg(long)]
    pub no_unfiltered: bool,
    #[arg(long, short, value_name = "DIR")]
    pub output: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: mop_core::MopError| e.to_string())
}

impl RunArgs {
    /// The config file (or defaults) with flag overrides applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(path) = &self.csv {
            c.input = InputConfig { csv: Some(path.clone()), ..InputConfig::default() };
        }
        if let Some(b) = self.builtin {
            c.input.csv = None;
            c.input.builtin = Some(b);
        }
        if self.n.is_some() {
            c.input.n = self.n;
        }
        if !self.responses.is_empty() {
            c.responses = self.responses.clone();
        }
        if let Some(q) = self.folds {
            c.scheme = SchemeConfig::CrossValidation { q };
        }
        if let Some(fraction) = self.split {
            c.scheme = SchemeConfig::Split { fraction };
        }
        if let Some(d) = self.delta_cop {
            c.delta_cop = d;
        }
        if let Some(seed) = self.seed {
            c.seeds = Seeds::all(seed);
        }
        if let Some(n) = self.sensitivity_samples {
            c.sensitivity_samples = n;
        }
        if !self.quantiles.is_empty() {
            c.search.quantiles = self.quantiles.clone();
        }
        if !self.coi_mins.is_empty() {
            c.search.coi_mins = self.coi_mins.clone();
        }
        if !self.kinds.is_empty() {
            c.search.kinds = self.kinds.clone();
        }
        if self.no_unfiltered {
            c.search.include_unfiltered = false;
        }
        if let Some(dir) = &self.output {
            c.output_dir = dir.clone();
        }
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// `model.json` written by `run`.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// CSV with a header naming the model inputs.
    #[arg(long, value_name = "FILE")]
    pub points: PathBuf,
    /// Destination CSV; stdout when absent.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}
