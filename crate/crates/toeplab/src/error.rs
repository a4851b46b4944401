use thiserror::Error;

/// Every fallible operation in the lab returns this error.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("unsupported dimension n = {0}: deterministic quadrature requires n = 1")]
    UnsupportedDimension(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("form degree mismatch: expected {expected}, got {got}")]
    FormDegree { expected: usize, got: usize },
    #[error("self-check failed: {0}")]
    SelfCheck(String),
    #[error("extrapolation residual {residual:e} exceeds tolerance {tol:e}")]
    Extrapolation { residual: f64, tol: f64 },
    #[error("regularity check failed: {0}")]
    Regularity(String),
    #[error("catalog has no entry named `{0}`")]
    CatalogMiss(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown subcommand `{0}`")]
    UnknownSubcommand(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
