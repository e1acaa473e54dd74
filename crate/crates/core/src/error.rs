use std::path::PathBuf;

/// Errors produced by the solvers, the kernel evaluator and the run driver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not converge within {panels} panels (residual estimate {residual:e})")]
    Quadrature { residual: f64, panels: usize },

    #[error("normalization integral {value:e} is too close to zero")]
    DegenerateNormalization { value: f64 },

    #[error("nonlinearity is not conservative; no potential is available")]
    NotConservative,

    #[error("inner fixed-point iteration stalled after {iterations} iterations (relative residual {residual:e})")]
    InnerNonConvergence { iterations: usize, residual: f64 },

    #[error("Picard contraction failed at iterate {iterate}: d_k did not decrease for {window} consecutive iterates")]
    ContractionFailed { iterate: usize, window: usize },

    #[error("kernel mass outside half the periodic box is {mass:e} (tolerance {tolerance:e}); enlarge the box")]
    WrapAround { mass: f64, tolerance: f64 },

    #[error("run horizon {requested} reaches the a priori blow-up horizon {horizon}")]
    BlowUpHorizon { requested: f64, horizon: f64 },

    #[error("solution lost finiteness at step {step}")]
    NonFinite { step: usize },

    #[error(
        "growth exponent alpha = {alpha} with N = {dimension} is outside every admissible regime"
    )]
    UnsupportedRegime { dimension: usize, alpha: f64 },

    #[error("{0}")]
    Config(#[from] crate::cli::ConfigErrors),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data file {path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
