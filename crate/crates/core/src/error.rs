use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or indices do not line up (qubit out of range, wrong vector length).
    #[error("structural error: {0}")]
    Structural(String),

    /// A value violates a documented precondition (non-unitary matrix, bad norm, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A trainable parameter slot is bound to something other than a Pauli rotation.
    #[error("unsupported slot {0}: trainable slots must be Pauli rotations")]
    UnsupportedSlot(usize),

    /// The fine-tuning copy pool ran dry.
    #[error("copy pool exhausted: requested {requested} copies, {remaining} remaining")]
    PoolExhausted { requested: usize, remaining: usize },

    /// A brute-force computation would exceed the configured size cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("unknown experiment kind `{0}`")]
    UnknownKind(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable code, used in CLI error records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Structural(_) => "structural",
            Error::Validation(_) => "validation",
            Error::UnsupportedSlot(_) => "unsupported_slot",
            Error::PoolExhausted { .. } => "pool_exhausted",
            Error::Capacity(_) => "capacity",
            Error::UnknownKind(_) => "unknown_kind",
            Error::Config(_) => "invalid_config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
