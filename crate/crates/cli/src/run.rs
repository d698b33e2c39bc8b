//! The `run` command: search the MOP for each response and emit artifacts.

use std::path::PathBuf;

use log::info;
use mop_core::{benchmarks, find_mop, DesignTable, MopError};

use crate::artifacts::{self, Provenance};
use crate::config::{Builtin, RunConfig};
use crate::error::{CliError, Result};

/// Samples described by the input section of a validated config.
pub fn load_table(config: &RunConfig) -> Result<DesignTable<f64>> {
    let input = &config.input;
    let table = match (&input.csv, input.builtin) {
        (Some(path), _) => {
            let responses = config.response_names();
            let names: Vec<&str> = responses.iter().map(String::as_str).collect();
            DesignTable::load_csv(path, &names).map_err(|e| CliError::from(e).in_file(path))?
        }
        (None, Some(builtin)) => {
            let n = input.n.ok_or_else(|| CliError::config("input.n", "missing"))?;
            let seed = config.seeds.data;
            match builtin {
                Builtin::Ishigami => benchmarks::ishigami_table(n, seed)?,
                Builtin::Quad2d => benchmarks::quad2d_table(n, seed)?,
                Builtin::Active2of8 => benchmarks::active2of8_table(n, seed)?,
            }
        }
        (None, None) => return Err(CliError::config("input", "no input source")),
    };
    Ok(table)
}

/// Files of one response, rendered but not yet written.
struct Staged {
    response: String,
    files: Vec<(&'static str, Vec<u8>)>,
    summary: String,
}

/// Runs the search for every response, then writes all artifacts. Nothing is
/// written unless every response succeeds. Returns the written paths.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let table = load_table(config)?;
    let options = config.mop_options();
    let provenance = Provenance { config_hash: config.hash(), seeds: config.seeds };

    let mut staged = Vec::new();
    for response in config.response_names() {
        info!("searching the MOP for `{response}` over {} samples", table.n_samples());
        let mop = find_mop(&table, &response, &options).map_err(|e| match e {
            MopError::NoFeasibleModel(reasons) => CliError::NoFeasibleModel { response: response.clone(), reasons },
            e => CliError::Data(e),
        })?;
        let y = table.response(&response)?;
        let render = |name: &str, payload: serde_json::Value| -> Result<Vec<u8>> {
            Ok(artifacts::to_json_bytes(&artifacts::envelope(name, &response, &provenance, &payload)?))
        };
        let files = vec![
            (artifacts::MOP_RESULT, render("mop_result", to_value(&mop.result)?)?),
            (artifacts::QUALITY_REPORT, render("quality_report", to_value(&mop.quality)?)?),
            (artifacts::SENSITIVITY, render("sensitivity", to_value(&mop.result.sensitivity)?)?),
            (artifacts::MODEL, render("model", to_value(&mop.model)?)?),
            (artifacts::SCATTER, artifacts::scatter_tsv(y, &mop.validation_predictions).into_bytes()),
            (artifacts::GRID, artifacts::grid_tsv(&mop.model, &table, &mop.result.sensitivity)?.into_bytes()),
        ];
        staged.push(Staged { summary: artifacts::bar_table(&mop), response, files });
    }

    let mut written = Vec::new();
    for s in &staged {
        let dir = config.output_dir.join(&s.response);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        for (name, bytes) in &s.files {
            let path = dir.join(name);
            artifacts::write_atomic(&path, bytes)?;
            written.push(path);
        }
    }
    for s in &staged {
        print!("{}", s.summary);
    }
    Ok(written)
}

fn to_value(payload: &impl serde::Serialize) -> Result<serde_json::Value> {
    serde_json::to_value(payload).map_err(|e| CliError::Data(e.into()))
}
