use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision cap of {cap} bits reached without a certified answer")]
    PrecisionExhausted { cap: u32 },
    #[error("balls use different exponents p = {0} and p = {1}")]
    MixedP(u32, u32),
    #[error("approximation scheme inconsistent between indices {m} and {m2}")]
    SchemeInconsistent { m: u32, m2: u32 },
    #[error("strategy contract violated in round {round} by {player}: {reason}")]
    StrategyContractViolation { round: usize, player: String, reason: String },
    #[error("schedule exhausted at round {round}: {reason}")]
    ScheduleExhausted { round: usize, reason: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Short machine-readable tag, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DivisionByZero",
            Error::PrecisionExhausted { .. } => "PrecisionExhausted",
            Error::MixedP(..) => "MixedP",
            Error::SchemeInconsistent { .. } => "SchemeInconsistent",
            Error::StrategyContractViolation { .. } => "StrategyContractViolation",
            Error::ScheduleExhausted { .. } => "ScheduleExhausted",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
