use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid weight matrix: {0}")]
    InvalidWeight(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rank-deficient map: smallest/largest singular value ratio {ratio:e} is below {threshold:e}")]
    RankDeficient { ratio: f64, threshold: f64 },

    #[error("evaluation failed at t = {t}, x = {x:?}: {reason}")]
    Evaluation { t: f64, x: Vec<f64>, reason: String },

    #[error("unknown system {name:?}; valid names: {}", valid.join(", "))]
    UnknownSystem { name: String, valid: Vec<String> },

    #[error("integration diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("no convergence after {iterations} iterations (last step {last_step:e})")]
    NonConvergence { iterations: usize, last_step: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("eigen-solver did not converge: {0}")]
    Eigen(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
