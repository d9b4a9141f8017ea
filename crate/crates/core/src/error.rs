use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VppError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("time {t} outside the admissible interval [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error(
        "{method} did not converge: relative residual {achieved:.3e} after {iterations} iterations \
         (target {target:.1e})"
    )]
    NonConvergence {
        method: &'static str,
        achieved: f64,
        target: f64,
        iterations: usize,
    },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<VppError>,
    },

    #[error("singular system: {0}")]
    Singular(String),

    /// A record sink refused a record (typically an I/O failure downstream).
    #[error("output sink failed: {0}")]
    Sink(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
}

impl VppError {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        VppError::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        VppError::Step {
            step,
            source: Box::new(self),
        }
    }

    /// True when the error originates from an iterative or direct solve.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            VppError::NonConvergence { .. } | VppError::Singular(_) => true,
            VppError::Step { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }

    pub fn is_sink_failure(&self) -> bool {
        match self {
            VppError::Sink(_) => true,
            VppError::Step { source, .. } => source.is_sink_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, VppError>;
