//! Batch front end: run configurations, builtin benchmarks, artifact output
//! and prediction with stored models.

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod run;

pub use config::RunConfig;
pub use error::{CliError, Result};

/// Dispatches a parsed command line.
pub fn execute(cli: cli::Cli) -> Result<()> {
    match cli.command {
        cli::Command::Run(args) => run::run(&args.resolve()?).map(|_| ()),
        cli::Command::Evaluate(args) => evaluate::evaluate(&args.model, &args.points, args.output.as_deref()),
    }
}
