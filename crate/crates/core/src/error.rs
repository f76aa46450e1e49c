use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid discount parameters: {0}")]
    InvalidDiscount(String),

    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid value table: {0}")]
    InvalidValues(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid solver configuration: {0}")]
    InvalidSolverConfig(String),

    #[error("invalid step-size schedule: {0}")]
    InvalidSchedule(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("singular linear system in policy evaluation")]
    SingularSystem,

    #[error("coverage violated at state {state}, action {action}: target mass {target} with zero behavior mass")]
    CoverageViolation {
        state: usize,
        action: usize,
        target: f64,
    },

    #[error("Q-table constructions disagree by {0:e}")]
    InconsistentQh(f64),

    #[error("horizon {horizon} too short: truncation bias bound {bias:e} exceeds requested {requested:e}")]
    HorizonTooShort {
        horizon: usize,
        bias: f64,
        requested: f64,
    },

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),
}
