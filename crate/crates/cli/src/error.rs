use std::path::Path;

use molforest::classifiers::ClassifierError;
use molforest::evaluate::EvaluateError;
use thiserror::Error;

/// Failure of one command. Each variant owns an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Training(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Training(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Config(_) => "config",
            CliError::Parse(_) => "parse",
            CliError::Training(_) => "training",
        }
    }

    /// `error[<kind>]: <message>` on a single line.
    pub fn line(&self) -> String {
        let msg = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error[{}]: {msg}", self.kind())
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn parse(path: &Path, e: impl std::fmt::Display) -> CliError {
        CliError::Parse(format!("{}: {e}", path.display()))
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::InvalidConfig(_) => CliError::Config(e.to_string()),
            _ => CliError::Training(e.to_string()),
        }
    }
}

impl From<EvaluateError> for CliError {
    fn from(e: EvaluateError) -> Self {
        match e {
            EvaluateError::InvalidProtocol(_) | EvaluateError::InvalidFraction { .. } | EvaluateError::TooFewRows { .. } => {
                CliError::Config(e.to_string())
            }
            EvaluateError::Csv(_) | EvaluateError::Json(_) | EvaluateError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Training(e.to_string()),
        }
    }
}
