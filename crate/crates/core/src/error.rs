use thiserror::Error;

/// Errors shared across the numeric and symbolic modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integration failure at t = {t}: step size underflow (h = {h:.3e})")]
    IntegrationFailure { t: f64, h: f64 },

    #[error("matrix is not symplectic within tolerance (defect {defect:.3e})")]
    NotSymplectic { defect: f64 },

    #[error("matrix is not in the symplectic Lie algebra within tolerance (defect {defect:.3e})")]
    NotInAlgebra { defect: f64 },

    #[error("matrix function is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e} at t = {t})")]
    NotPsd { t: f64, min_eigenvalue: f64 },

    #[error("ring mismatch: {0}")]
    RingMismatch(String),

    #[error("critical table too shallow: {0}")]
    TableDepth(String),

    #[error("model JSON: {0}")]
    ModelJson(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
