//! Experiment driver: configuration, seeded parallel ensembles, CSV
//! persistence, correlation estimates, reports and SVG figures.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod experiment;
pub mod svg;

pub use commands::Outcome;
pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("inputs disagree: {0}")]
    MetadataMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] shellzeros::Error),
}
