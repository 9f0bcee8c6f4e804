use thiserror::Error;

#[derive(Debug, Error)]
pub enum AtcError {
    #[error("invalid chain model: {0}")]
    InvalidModel(String),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid force specification: {0}")]
    InvalidForce(String),

    #[error("index {index} outside field range [{lo}, {hi}]")]
    IndexOutOfRange { index: i64, lo: usize, hi: usize },

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("missing or non-finite boundary value: {0}")]
    MissingBoundary(String),

    #[error("field domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("factorization failed: non-positive pivot {value:e} at row {pivot}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("residual {residual:e} exceeds acceptance threshold {threshold:e}")]
    ResidualTooLarge { residual: f64, threshold: f64 },

    #[error("gram matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    GramNotPositiveDefinite { min_eigenvalue: f64 },

    #[error("verified bound violated: {0}")]
    BoundViolated(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl AtcError {
    /// True for errors caused by bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            AtcError::InvalidModel(_)
                | AtcError::InvalidDecomposition(_)
                | AtcError::InvalidForce(_)
                | AtcError::IndexOutOfRange { .. }
                | AtcError::DomainTooSmall(_)
                | AtcError::MissingBoundary(_)
                | AtcError::DomainMismatch(_)
                | AtcError::Config(_)
        )
    }
}

pub type Result<T, E = AtcError> = std::result::Result<T, E>;
