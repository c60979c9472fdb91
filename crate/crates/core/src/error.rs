use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("no rule row for feature {feature} at transcript prefix {prefix:?}")]
    UndefinedRuleRow { feature: usize, prefix: Vec<usize> },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("user {0} has an empty action set")]
    EmptyActionSet(usize),

    #[error("search space of {count} candidates exceeds the cap of {cap}")]
    SearchSpaceTooLarge { count: u128, cap: u128 },

    #[error("action-profile space of {count} entries exceeds the cap of {cap}")]
    ProfileSpaceTooLarge { count: u128, cap: u128 },

    #[error("message space of size {available} cannot encode {needed} values")]
    MessageSpaceTooSmall { needed: usize, available: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("user {user} has no covering provider with positive weight")]
    CoverageViolation { user: usize },

    #[error("parameter violation: {0}")]
    ParameterViolation(String),

    #[error("schema error at row {row}: {reason}")]
    Schema { row: usize, reason: String },

    #[error("inconsistent option counts for question {0}")]
    InconsistentOptions(String),

    #[error("no distribution for {label} on question {question}")]
    MissingDistribution { question: String, label: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
