use std::path::PathBuf;

/// Errors raised across the toolkit.
///
/// The CLI maps [`Error::is_numeric`] failures to exit code 3 and
/// everything else to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty level sequence")]
    EmptySequence,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("eigen-decomposition failed for matrix (seed {seed}, member {member}): {reason}")]
    Eigen {
        seed: u64,
        member: usize,
        reason: String,
    },

    #[error("spacing fit did not converge after {iterations} iterations (best mu = {best_mu:.4}, residual = {best_residual:.3e})")]
    FitFailure {
        iterations: usize,
        best_gamma: f64,
        best_mu: f64,
        best_chi: f64,
        best_residual: f64,
    },

    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    #[error("logarithmic singularity of the symplectic form factor at |tau| = {0}")]
    Singular(f64),

    #[error("pole of the power-spectrum formula at tau = {0}")]
    Pole(f64),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: parse error: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures of a numerical routine rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_)
                | Error::Eigen { .. }
                | Error::FitFailure { .. }
                | Error::EstimationFailure(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
