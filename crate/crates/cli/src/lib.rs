//! Scenario runner behind the `polargate` binary: config ingestion, the
//! subcommands, and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Command, Report};
pub use config::{Scenario, ScenarioConfig};
pub use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] polargate::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 0 ok, 1 configuration, 2 physics, 3 degenerate gate.
    pub fn exit_code(&self) -> i32 {
        use polargate::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                E::DegenerateGate { .. } => 3,
                E::ZeroRate(_) | E::RestrictionViolation { .. } | E::NonFiniteAmplitude | E::InvalidSigma(_) => 2,
                _ => 1,
            },
        }
    }
}
