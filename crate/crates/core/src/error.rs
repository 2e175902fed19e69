use thiserror::Error;

pub type Result<T> = std::result::Result<T, SynthError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    /// A constructor would drop more probability mass than allowed.
    #[error("truncated probability mass {lost:.3e} exceeds {limit:.0e} at dim {dim}; dim >= {required} is required")]
    Truncation {
        lost: f64,
        limit: f64,
        dim: usize,
        required: usize,
    },

    /// A unitary pushed weight outside the truncated space.
    #[error("trace leaked {lost:.3e} outside Fock truncation dim {dim}; use a larger dim")]
    Leakage { lost: f64, dim: usize },

    #[error("herald probability underflow (p = {p:.3e})")]
    HeraldUnderflow { p: f64 },

    #[error("herald probability underflow at cascade stage {stage} (p = {p:.3e})")]
    StageUnderflow { stage: usize, p: f64 },

    #[error("odd cat state with zero amplitude is the null vector")]
    NullCat,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl SynthError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SynthError::InvalidParameter(msg.into())
    }
}
