use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument violates a precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bracketed solver could not locate or refine a root.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// Adaptive quadrature exhausted its subdivision budget before
    /// reaching the requested tolerance.
    #[error("quadrature subdivision budget exceeded on [{lo}, {hi}]")]
    QuadratureBudget { lo: f64, hi: f64 },

    /// An empirical functional was asked for on an empty sample.
    #[error("empty sample")]
    EmptySample,

    /// Neither admissible family fits the tabulated samples.
    #[error("ill-conditioned fit: constant rms {constant_rms:.3e}, exp-family rms {exp_rms:.3e}, sample range {range:.3e}")]
    IllConditionedFit {
        constant_rms: f64,
        exp_rms: f64,
        range: f64,
    },

    /// Malformed CSV input.
    #[error("csv parse error: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code for the CLI: 1 for usage/validation problems,
    /// 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::SolverFailure(_) | Error::QuadratureBudget { .. } => 2,
            _ => 1,
        }
    }
}
