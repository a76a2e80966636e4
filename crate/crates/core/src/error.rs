use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Riesz kernel `|x-y|^{2H-2}` is not integrable-normalizable at H = 1/2.
    #[error("kernel undefined at white-noise limit (H = 1/2)")]
    KernelUndefined,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidKey { key: String, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("index ({i}, {j}) out of range: {reason}")]
    Index { i: i64, j: i64, reason: String },

    #[error("embedding failed: minimum eigenvalue {min_eigenvalue:e} below tolerance")]
    EmbeddingFailed { min_eigenvalue: f64 },

    #[error("covariance not positive semidefinite: pivot {pivot:e} at row {row}")]
    NotPositiveSemidefinite { row: usize, pivot: f64 },

    #[error("numerical blow-up at lattice node ({i}, {j})")]
    NumericalBlowup { i: i64, j: i64 },

    #[error("degenerate diffusion: Riemann sum of F^2 is zero")]
    DegenerateDiffusion,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Failures caused by the numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EmbeddingFailed { .. }
                | Error::NotPositiveSemidefinite { .. }
                | Error::NumericalBlowup { .. }
                | Error::DegenerateDiffusion
        )
    }

    pub(crate) fn invalid(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidKey {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}
