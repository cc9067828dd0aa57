use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: entry ({row},{col}) = {value} but conj of ({col},{row}) = {mirror} (tolerance {tolerance:e})")]
    NotHermitian {
        row: usize,
        col: usize,
        value: String,
        mirror: String,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigenvalue {eigenvalue} lies outside the domain {domain} of `{function}`")]
    OutsideDomain {
        function: String,
        eigenvalue: f64,
        domain: String,
    },

    #[error("numerically singular operator: smallest singular value {smallest_singular_value:e}, condition number {condition:e}")]
    Singular {
        smallest_singular_value: f64,
        condition: f64,
    },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("`{function}` is not tagged {required}; pass an explicit override to run this check")]
    ClassGate { function: String, required: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
