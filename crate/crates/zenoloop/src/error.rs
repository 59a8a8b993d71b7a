use thiserror::Error;

/// Crate-wide error type.
///
/// `Config` maps to process exit code 2, everything else to 3 (see `main.rs`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A state or mixture with (numerically) vanishing norm was fed to an
    /// operation that must divide by it.
    #[error("zero-norm state in {context}")]
    ZeroNorm { context: &'static str },

    /// A polarization state that should be normalized is not.
    #[error("polarization state is not normalized (squared norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("no detected photons to estimate from")]
    InsufficientData,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
