use crate::sim::AuditViolation;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("workload parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// `apply` was called with an action that `validate` did not accept.
    /// This is a caller bug, not an agent mistake.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("exact solver accepts at most {max} jobs, got {got}")]
    TooManyJobs { got: usize, max: usize },

    #[error("exact solver exceeded its time budget")]
    TimeBudgetExceeded,

    #[error("provider error: {0}")]
    Provider(String),

    #[error("mock script exhausted after {0} responses")]
    ScriptExhausted(usize),

    #[error("call budget exhausted: {calls} provider calls (limit {limit})")]
    CallBudgetExhausted { calls: u32, limit: u32 },

    #[error("schedule failed audit with {} violation(s); first: {first}", .violations.len())]
    AuditFailed {
        violations: Vec<AuditViolation>,
        first: String,
    },

    #[error("missing FCFS baseline for group {0}")]
    MissingBaseline(String),
}

pub type Result<T> = std::result::Result<T, Error>;
