use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid surgery data: {0}")]
    InvalidSurgery(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("level {k} outside potential domain [{k_min}, {k_max}]")]
    OutOfDomain { k: f64, k_min: f64, k_max: f64 },

    #[error("degenerate potential: minimum return time {tau_min} is not positive")]
    Degenerate { tau_min: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model is not tame: contact volume is only bounded below by the potential integrals")]
    NotTame,

    #[error("Euler number must be nonzero")]
    ZeroEuler,

    #[error("invalid graph operation: {0}")]
    Graph(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("generator budget exhausted after {attempts} attempts for profile {profile}: {last_failure}")]
    BudgetExhausted {
        profile: String,
        attempts: usize,
        last_failure: String,
    },

    #[error("theorem violation: ratio {ratio} exceeds bound {bound}; this indicates an implementation bug")]
    TheoremViolation { ratio: f64, bound: f64 },

    #[error("invalid interval ({lo}, {hi}): {reason}")]
    Interval { lo: String, hi: String, reason: String },

    #[error("orbit scan needs denominators above {q_limit}; periods not yet excluded are at least {lower_bound}")]
    ScanLimit { q_limit: u64, lower_bound: f64 },

    #[error("invalid family: {0}")]
    Family(String),
}

pub type Result<T> = std::result::Result<T, Error>;
