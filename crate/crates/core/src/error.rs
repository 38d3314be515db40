use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{0}")]
    Usage(String),

    /// A chain produced a non-finite state. `position` is filled in by the
    /// generation loop when the failure happened inside a sequence.
    #[error("numerical divergence at denoising step t={step}{}", .position.map(|p| format!(" (token position {p})")).unwrap_or_default())]
    Divergence { step: usize, position: Option<usize> },

    #[error(
        "rejection resampling exhausted after {trials} trials; estimated Z = {z_estimate:.3e}, \
         bound M = 1/Z ~ {bound:.3e} (draft and target are nearly identical here)"
    )]
    ResampleExhausted { trials: u32, z_estimate: f64, bound: f64 },

    #[error("analytic oracle unsupported: {0}")]
    UnsupportedOracle(&'static str),

    #[error("densities are indistinguishable on the grid (Z = {0:.3e}); modified distribution undefined")]
    IndistinguishableDensities(f64),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// Attach a token position to a divergence error; other variants pass through.
    pub fn at_position(self, pos: usize) -> Self {
        match self {
            Error::Divergence { step, position: None } => Error::Divergence {
                step,
                position: Some(pos),
            },
            other => other,
        }
    }

    /// Process exit status for the command-line front end: 2 for usage and
    /// configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. }
            | Error::ResampleExhausted { .. }
            | Error::NonFinite(_)
            | Error::IndistinguishableDensities(_) => 3,
            _ => 2,
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
