use thiserror::Error;

/// Errors raised by the sparse-recovery toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("zero signal has no energy support")]
    ZeroSignal,

    /// Exhaustive enumeration would visit more subsets than allowed.
    #[error("enumeration of {required} subsets exceeds the budget of {budget}; {hint}")]
    BudgetExceeded {
        required: u128,
        budget: u128,
        hint: &'static str,
    },

    /// A coefficient formula was evaluated outside the region where its
    /// denominator is positive.
    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("restricted isometry table has no entry for {0}")]
    MissingConstant(String),

    /// The signal sequence model cannot be evolved with the requested churn.
    #[error("sequence model error: {0}")]
    Model(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
