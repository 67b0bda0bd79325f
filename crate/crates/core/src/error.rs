use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid feature space: {0}")]
    InvalidSpace(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid literal: {0}")]
    InvalidLiteral(String),

    #[error("invalid clause: {0}")]
    InvalidClause(String),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("load error at row {row}, column {column}: {message}")]
    Load {
        row: usize,
        column: String,
        message: String,
    },

    #[error("quantization error: {0}")]
    Quantize(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("feature space has {size} points, above the enumeration bound {bound}")]
    SpaceTooLarge { size: BigUint, bound: u64 },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
