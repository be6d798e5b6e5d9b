use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("malformed input {path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error(transparent)]
    Model(#[from] evmix::Error),

    #[error("cannot encode output: {0}")]
    Json(#[from] serde_json::Error),

    #[error("fit did not converge: {0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use evmix::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Data { .. } | CliError::Json(_) => 2,
            CliError::NotConverged(_) => 4,
            CliError::Model(e) => match e {
                E::InvalidParameter { .. } | E::InvalidSpec(_) | E::OutOfRange { .. } | E::DegenerateLaw(_) => 1,
                E::DegenerateSample(_) | E::InsufficientData(_) | E::SupportViolation { .. } | E::NegativeStatistic(_) => 2,
                E::NotIdentifiable(_) => 3,
                E::NonConvergence(_) | E::MissingCovariance => 4,
                E::Capacity { .. } => 5,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "usage",
            2 => "data",
            3 => "identifiability",
            4 => "convergence",
            _ => "capacity",
        }
    }

    /// One-line JSON description for stderr.
    pub fn to_json(&self) -> String {
        json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;
