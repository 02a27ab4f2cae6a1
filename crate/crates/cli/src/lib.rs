//! Scenario orchestration for the `secbound` command-line tool: chain
//! trajectories, bound verification on random models, measure
//! optimization and parameter sweeps, with deterministic CSV and JSON
//! output.

pub mod args;
pub mod config;
pub mod output;
pub mod scenario;
pub mod suite;
pub mod sweep;

use thiserror::Error;

use secbound_core::diagnostics::DiagnosticsError;
use secbound_core::evolution::EvolutionError;
use secbound_core::linalg::LinalgError;
use secbound_core::measure::MeasureError;
use secbound_core::model::ModelError;

pub use config::{parse_config, ConfigError, Overrides, RunConfig, Scenario};

/// Process exit status for a finished command.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Evolution(EvolutionError::SubspaceUnavailable)
            | RunError::Measure(MeasureError::Evolution(EvolutionError::SubspaceUnavailable)) => EXIT_CONFIG,
            _ => EXIT_INVARIANT,
        }
    }
}

/// Result of a command: its summary document and any invariant failures.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: serde_json::Value,
    pub violations: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            EXIT_OK
        } else {
            EXIT_INVARIANT
        }
    }
}
