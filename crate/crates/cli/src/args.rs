use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use secbound_core::model::OperatorConvention;
use secbound_core::PathChoice;

use crate::config::{parse_convention, parse_path_choice, GridAxis, Overrides, PairSpec, Scenario};

#[derive(Debug, Parser)]
#[command(name = "secbound", version, about = "Non-Markovianity and system-environment correlations in spin chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its trajectory CSV and summary JSON.
    Run(RunArgs),
    /// Evaluate the measure on a grid of (J0/J, B/J) points.
    Sweep(RunArgs),
    /// Run the random-model bound suite and the chain's structural invariants.
    Verify(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON configuration file; flags take precedence over its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// fig1a, fig1b, fig2a, fig2b, bound-check, measure, sweep or custom.
    #[arg(long)]
    pub scenario: Option<Scenario>,
    /// Total number of spins, system included.
    #[arg(long)]
    pub n_spins: Option<usize>,
    /// Environment coupling J.
    #[arg(long)]
    pub j: Option<f64>,
    /// System-environment coupling J0.
    #[arg(long)]
    pub j0: Option<f64>,
    #[arg(long)]
    pub b_field: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// paper, equatorial:K or random:N.
    #[arg(long)]
    pub pair: Option<PairSpec>,
    /// dense, subspace or auto.
    #[arg(long, value_parser = parse_path_choice)]
    pub path: Option<PathChoice>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trajectory (or sweep) CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Also apply the field to the system spin.
    #[arg(long)]
    pub field_on_system: bool,
    /// spin (S = sigma/2, default) or pauli.
    #[arg(long, value_parser = parse_convention)]
    pub convention: Option<OperatorConvention>,
    /// Generic model file for the custom scenario.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Number of random models in bound checks.
    #[arg(long)]
    pub models: Option<usize>,
    /// J0/J values for sweeps, as min:max:count.
    #[arg(long)]
    pub j0_grid: Option<GridAxis>,
    /// B/J values for sweeps, as min:max:count.
    #[arg(long)]
    pub b_grid: Option<GridAxis>,
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            scenario: self.scenario,
            n_spins: self.n_spins,
            j: self.j,
            j0: self.j0,
            b_field: self.b_field,
            t_max: self.t_max,
            steps: self.steps,
            pair: self.pair,
            path: self.path,
            seed: self.seed,
            out: self.out.clone(),
            summary: self.summary.clone(),
            field_on_system: self.field_on_system.then_some(true),
            convention: self.convention,
            model: self.model.clone(),
            models: self.models,
            j0_grid: self.j0_grid,
            b_grid: self.b_grid,
        }
    }
}
