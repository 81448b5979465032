//! Experiment orchestration for the `hypo` toolkit: configuration, parameter admissibility,
//! canonical experiments and report emission.

pub mod config;
pub mod experiments;
pub mod params;
pub mod report;

pub use config::{Axis, Config, Profile};
pub use experiments::{run_experiment, sweep, Experiment, RunOptions};
pub use params::ParameterSet;
pub use report::{Assertion, ExperimentResult, Table};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("parameters not admissible: {0}")]
    NotAdmissible(String),
    #[error(transparent)]
    Module(#[from] hypo::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("report: {0}")]
    Report(String),
}

impl HarnessError {
    /// Exit code: 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::ConfigInvalid(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::ConfigInvalid(_) => "ConfigInvalid",
            HarnessError::NotAdmissible(_) => "NotAdmissible",
            HarnessError::Module(e) => e.kind(),
            HarnessError::Io(_) => "Io",
            HarnessError::Report(_) => "Report",
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
