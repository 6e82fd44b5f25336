use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("longitudinal velocity required")]
    MissingVelocity,

    #[error("invalid transverse dimension {0}; expected 1 or 2")]
    InvalidDimension(u32),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid overflow: boundary density {ratio:.3e} of peak exceeds {limit:.0e}")]
    GridOverflow { ratio: f64, limit: f64 },

    #[error("phase undefined: on-axis amplitude {0:.3e} below threshold")]
    PhaseUndefined(f64),

    #[error("field not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("ill-posed fit: {0}")]
    IllPosed(String),

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::IllPosed(_) => 3,
            Error::VerificationFailed(_) => 4,
            _ => 1,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects NaN/inf and, when `allow_zero` is false, non-positive values.
pub(crate) fn require_positive(name: &'static str, value: f64, allow_zero: bool) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::invalid(name, format!("must be finite, got {value}")));
    }
    if value < 0.0 || (!allow_zero && value == 0.0) {
        let bound = if allow_zero { ">= 0" } else { "> 0" };
        return Err(Error::invalid(
            name,
            format!("must be {bound}, got {value}"),
        ));
    }
    Ok(value)
}
