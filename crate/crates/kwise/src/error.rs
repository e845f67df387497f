use thiserror::Error;

/// Errors shared by every construction and verification module.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient seed prefix: need {needed} values, have {have}")]
    InsufficientSeed { needed: usize, have: usize },

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("rejection budget exceeded after {attempts} attempts ({context})")]
    RejectionBudget { attempts: u64, context: String },

    #[error("parameter search exhausted: {0}")]
    SearchExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;
