use thiserror::Error;

/// Errors raised by the numerical and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Fock cutoff {cutoff} is below the required floor {floor}")]
    CutoffTooSmall { cutoff: usize, floor: usize },

    #[error("quadrature did not converge within {panels} panels (last {last:e}, previous {previous:e})")]
    NoConvergence {
        panels: usize,
        last: f64,
        previous: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code for the CLI contract: 2 config, 3 numerical, 4 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::DimensionMismatch { .. } => 2,
            Error::CutoffTooSmall { .. } | Error::NoConvergence { .. } | Error::Numerical(_) => 3,
            Error::Invariant(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
