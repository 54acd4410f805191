use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not hermitian (anti-hermitian part has trace norm {residual:.3e})")]
    NonHermitian { residual: f64 },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix dimension {dim} exceeds the dense cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("mode {mode} out of range for a system of {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("invalid mode ordering: {0}")]
    InvalidOrdering(String),

    #[error("parity superselection violated (off-sector trace norm {residual:.3e})")]
    ParityViolation { residual: f64 },

    #[error("trace {trace} exceeds 1")]
    TraceTooLarge { trace: f64 },

    #[error("state is not normalized (trace {trace})")]
    NotNormalized { trace: f64 },

    #[error("every mode was traced out; use the full trace instead")]
    EmptyComplement,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("purifications have different marginals (trace distance {distance:.3e})")]
    MarginalMismatch { distance: f64 },

    #[error("Kraus operator {index} has no definite parity (even part {even_norm:.3e}, odd part {odd_norm:.3e})")]
    IndefiniteParityKraus {
        index: usize,
        even_norm: f64,
        odd_norm: f64,
    },

    #[error("Kraus completeness violated (residual {residual:.3e})")]
    CompletenessViolation { residual: f64 },

    #[error("channel is not deterministic")]
    NotDeterministic,

    #[error(
        "operator is not an effect (spectrum in [{min_eigenvalue:.3e}, {max_eigenvalue:.3e}])"
    )]
    NotAnEffect {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("dense evaluation unavailable: {0}")]
    DenseUnavailable(String),

    #[error("rate {rate} is not below the entropy {entropy}")]
    RateNotBelowEntropy { rate: f64, entropy: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("type-class enumeration too large ({classes} classes)")]
    ClassLimitExceeded { classes: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Name of the violated condition.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonHermitian { .. } => "NonHermitian",
            Error::NoConvergence => "NoConvergence",
            Error::NotPsd { .. } => "NotPsd",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DenseCapExceeded { .. } => "DenseCapExceeded",
            Error::NonFinite => "NonFinite",
            Error::ModeOutOfRange { .. } => "ModeOutOfRange",
            Error::InvalidOrdering { .. } => "InvalidOrdering",
            Error::ParityViolation { .. } => "ParityViolation",
            Error::TraceTooLarge { .. } => "TraceTooLarge",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::EmptyComplement => "EmptyComplement",
            Error::InvalidState { .. } => "InvalidState",
            Error::MarginalMismatch { .. } => "MarginalMismatch",
            Error::IndefiniteParityKraus { .. } => "IndefiniteParityKraus",
            Error::CompletenessViolation { .. } => "CompletenessViolation",
            Error::NotDeterministic => "NotDeterministic",
            Error::NotAnEffect { .. } => "NotAnEffect",
            Error::DenseUnavailable { .. } => "DenseUnavailable",
            Error::RateNotBelowEntropy { .. } => "RateNotBelowEntropy",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::ClassLimitExceeded { .. } => "ClassLimitExceeded",
            Error::Io { .. } => "Io",
            Error::Json { .. } => "Json",
        }
    }

    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
