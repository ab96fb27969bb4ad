use thiserror::Error;

#[derive(Debug, Error)]
pub enum GdnlsError {
    #[error("non-finite value at wavenumber {wavenumber}")]
    NonFinite { wavenumber: i64 },

    #[error("coefficient vector has length {len}; expected an odd length 2N+1")]
    BadLength { len: usize },

    #[error("fields have different mode counts ({left} vs {right})")]
    ModeMismatch { left: usize, right: usize },

    #[error("cutoff K = {cutoff} exceeds num_modes N = {num_modes}")]
    CutoffExceedsModes { cutoff: usize, num_modes: usize },

    #[error("physical grid of {requested} points exceeds the maximum of {max}")]
    GridTooLarge { requested: usize, max: usize },

    #[error("operation is undefined for the zero field")]
    ZeroField,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("checksum mismatch for {path}: expected {expected}, found {found}")]
    Checksum {
        path: String,
        expected: String,
        found: String,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("run aborted: {0}")]
    RunAborted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GdnlsError>;

pub(crate) fn invalid(msg: impl Into<String>) -> GdnlsError {
    GdnlsError::InvalidParameter(msg.into())
}
