use thiserror::Error;

/// Errors produced by the profile library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular point; use series_start")]
    SingularPoint,

    #[error("rho reached zero; aborting with diagnostic state zeta={zeta}, p1={p1}")]
    RhoNonPositive { zeta: f64, p1: f64 },

    #[error("zeta={zeta} outside available range [{lo}, {hi}]")]
    OutOfRange { zeta: f64, lo: f64, hi: f64 },

    #[error("ill-conditioned tail fit (condition {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("ansatz singular at t=T")]
    AnsatzSingular,

    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
