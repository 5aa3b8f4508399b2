use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock index {index} does not fit in dimension {dim}")]
    Index { index: usize, dim: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("state is not normalized (norm^2 = {0})")]
    Normalization(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("data are inconsistent with every quantum state (distance {distance:.3e})")]
    InconsistentData { distance: f64 },

    #[error("unsupported observable space: {0}")]
    UnsupportedSpace(String),

    #[error("no threshold on the requested interval: {0}")]
    NoThreshold(String),

    #[error("minimization diverged: {0}")]
    Diverged(String),

    #[error("parse error: {0}")]
    Parse(String),
}
