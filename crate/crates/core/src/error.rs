use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unrepresentable parameter: {0}")]
    Unrepresentable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("self-consistent adaptation rate did not converge at f_in = {f_in} Hz after {iterations} iterations")]
    NoConvergence { f_in: f64, iterations: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("routing table fault: unknown source {0}")]
    UnknownSource(u32),

    #[error("pending event buffer exceeded budget of {budget} events")]
    BufferOverflow { budget: usize },

    #[error("frame: bad magic")]
    BadMagic,

    #[error("frame: unsupported version {0}")]
    VersionMismatch(u8),

    #[error("frame: truncated payload ({0} bytes)")]
    Truncated(usize),

    #[error("frame: {0} events exceed the per-frame limit")]
    FrameTooLarge(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// Short machine-readable tag, used in the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::Unrepresentable(_) => "unrepresentable_parameter",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NoConvergence { .. } => "no_convergence",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::UnknownSource(_) => "unknown_source",
            Error::BufferOverflow { .. } => "buffer_overflow",
            Error::BadMagic => "bad_magic",
            Error::VersionMismatch(_) => "version_mismatch",
            Error::Truncated(_) => "truncated",
            Error::FrameTooLarge(_) => "frame_too_large",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
