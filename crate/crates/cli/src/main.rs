use std::process::ExitCode;

use clap::Parser;

use secbound_cli::args::{Cli, Command, RunArgs};
use secbound_cli::config::{read_config_file, resolve, Overrides, Scenario};
use secbound_cli::scenario::{run_scenario, verify};
use secbound_cli::{Outcome, RunConfig, RunError};

/// Layers flags over the optional config file. `forced` replaces any
/// scenario given; `fallback` applies only when none is.
fn settings(args: &RunArgs, forced: Option<Scenario>, fallback: Option<Scenario>) -> Result<RunConfig, RunError> {
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => Overrides::default(),
    };
    let mut merged = file.merged_with(&args.overrides());
    merged.scenario = forced.or(merged.scenario).or(fallback);
    Ok(resolve(&merged)?)
}

fn execute(command: &Command) -> Result<Outcome, RunError> {
    match command {
        Command::Run(args) => run_scenario(&settings(args, None, None)?),
        Command::Sweep(args) => run_scenario(&settings(args, Some(Scenario::Sweep), None)?),
        Command::Verify(args) => {
            let cfg = settings(args, None, Some(Scenario::Fig1a))?;
            verify(&cfg, args.summary.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(outcome) => {
            for v in &outcome.violations {
                eprintln!("violation: {v}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
