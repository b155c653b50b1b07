use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a supported prime modulus")]
    NotPrime(u64),
    #[error("division by zero in F_q")]
    DivisionByZero,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("operands live in different fields (F_{0} vs F_{1})")]
    FieldMismatch(u16, u16),
    #[error("polynomial must be nonzero")]
    ZeroPolynomial,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid twist: {0}")]
    InvalidTwist(String),
    #[error("CSS condition violated: HX * HZ^T != 0")]
    CssViolation,
    #[error("logical dimension mismatch between rank formulas: {0} vs {1}")]
    KFormulaMismatch(usize, usize),
    #[error("Groebner computation exceeded its budget: {0}")]
    ResourceLimit(String),
    #[error("code has no logical qudits; distance is undefined")]
    NoLogicals,
    #[error("exhaustive enumeration needs {needed} vectors, budget is {budget}")]
    BudgetExceeded { needed: f64, budget: u64 },
    #[error("checkpoint is corrupt: {0}")]
    CheckpointCorrupt(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier used in machine-readable CLI output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NotPrime",
            Error::DivisionByZero => "DivisionByZero",
            Error::Syntax { .. } => "SyntaxError",
            Error::FieldMismatch(..) => "FieldMismatch",
            Error::ZeroPolynomial => "ZeroPolynomial",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidTwist(_) => "InvalidTwist",
            Error::CssViolation => "CssViolation",
            Error::KFormulaMismatch(..) => "KFormulaMismatch",
            Error::ResourceLimit(_) => "ResourceLimit",
            Error::NoLogicals => "NoLogicals",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::CheckpointCorrupt(_) => "CheckpointCorrupt",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
