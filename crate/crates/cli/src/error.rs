use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<hiercode_core::sim::SimError> for CliError {
    fn from(e: hiercode_core::sim::SimError) -> Self {
        use hiercode_core::sim::SimError;
        match e {
            SimError::ThreadPool(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<hiercode_core::cost_model::CostError> for CliError {
    fn from(e: hiercode_core::cost_model::CostError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<hiercode_core::latency::LatencyError> for CliError {
    fn from(e: hiercode_core::latency::LatencyError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<hiercode_core::bounds::BoundsError> for CliError {
    fn from(e: hiercode_core::bounds::BoundsError) -> Self {
        CliError::Config(e.to_string())
    }
}
