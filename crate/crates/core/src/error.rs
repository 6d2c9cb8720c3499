use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("component index {index} out of range (m = {m})")]
    ComponentOutOfRange { index: usize, m: usize },

    #[error("component {index} has zero weight")]
    ZeroWeight { index: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("iterate norm {norm:e} exceeded bound {bound:e} at iteration {iteration}")]
    Diverged { iteration: u64, norm: f64, bound: f64 },

    #[error("step-size certificate violated at iteration {iteration}: {detail}")]
    StepSizeCertificate { iteration: u64, detail: String },

    #[error("markov chain has no unique limiting distribution ({0})")]
    NoStationaryDistribution(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
