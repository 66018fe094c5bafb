use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("basis misconfigured: state n={state} has relative energy error {error:.3e} (tolerance {tolerance:.1e})")]
    BasisConvergence {
        state: usize,
        error: f64,
        tolerance: f64,
    },

    #[error("eigensolver failed: residual {residual:.3e}")]
    Eigensolver { residual: f64 },

    #[error("Kepler solver did not converge for mean anomaly {anomaly}")]
    Kepler { anomaly: f64 },

    #[error("observable undefined: {0}")]
    Undefined(&'static str),

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("photon index {requested} leaves the bound spectrum (admissible range {min}..={max})")]
    LadderRange { requested: i64, min: i64, max: i64 },

    #[error("amplitude norm drifted by {0:.3e}")]
    NormDrift(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
