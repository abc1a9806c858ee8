//! Error types shared across the crate.

use thiserror::Error;

/// Invalid parameter or scenario configuration, detected before any stepping.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("invalid configuration: {field}: {message}")]
pub struct ConfigError {
    /// Dotted path of the offending field, e.g. `prior.release_rate.scale`.
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Raised when a Bayesian update leaves no particle with usable likelihood
/// (every particle's log-likelihood hit the floor).
#[derive(Debug, Clone, Error, PartialEq)]
#[error("degenerate posterior at step {step}: all particle weights underflowed")]
pub struct DegeneratePosterior {
    pub step: usize,
}

#[derive(Debug, Error)]
pub enum CoreError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Degenerate(#[from] DegeneratePosterior),
    #[error("planner: {0}")]
    Planner(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
