use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is singular: pivot magnitude {magnitude:e} at column {column}")]
    SingularMatrix { column: usize, magnitude: f64 },

    #[error("matrix is not unitary: |(U^dagger U - I)[{row}][{col}]| = {deviation:e}")]
    NotUnitary {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("coin at step {step}, position {position} is not unitary (deviation {deviation:e})")]
    InvalidCoin {
        step: u32,
        position: i64,
        deviation: f64,
    },

    #[error("parity structure violated: off-diagonal block norm {norm:e}")]
    StructureViolation { norm: f64 },

    #[error("amplitude leaked out of the programmable modes: {leakage:e}")]
    ConfinementFailure { leakage: f64 },

    #[error("coin is outside the hardware family (best-fit residual {residual:e})")]
    OutOfFamily { residual: f64 },

    #[error("time-bin capacity {capacity} too small for {needed} occupied positions (need tau/delta_tau >= {required_ratio})")]
    Capacity {
        capacity: usize,
        needed: usize,
        required_ratio: usize,
    },

    #[error("factorization identity violated: residual {residual:e}")]
    FactorizationViolation { residual: f64 },

    #[error("compiled schedule misses the target: residual {residual:e} exceeds {tolerance:e}")]
    VerificationFailed { residual: f64, tolerance: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// True for errors that signal a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::StructureViolation { .. }
                | Error::ConfinementFailure { .. }
                | Error::OutOfFamily { .. }
                | Error::FactorizationViolation { .. }
                | Error::VerificationFailed { .. }
                | Error::Internal(_)
        )
    }
}
