use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The zero quaternion has no inverse.
    #[error("quaternion has zero norm and cannot be inverted or normalized")]
    ZeroNorm,

    #[error("quaternion is not unit: | |q| - 1 | = {deviation:e} exceeds {tolerance:e}")]
    NotUnit { deviation: f64, tolerance: f64 },

    #[error("rotation axis has zero length")]
    ZeroAxis,

    #[error("matrix is not antisymmetric: max |M + Mᵀ| = {0:e}")]
    NotAntisymmetric(f64),

    #[error("matrix is not orthogonal: max |QᵀQ - I| = {0:e}")]
    NotOrthogonal(f64),

    #[error("matrix is not a proper rotation: det = {0}")]
    ImproperRotation(f64),

    #[error("step size must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("unknown chart `{0}` (expected `inertial_mu` or `mixed_m`)")]
    UnknownChart(String),

    #[error("chart mismatch: expected {expected}, found {found}")]
    ChartMismatch { expected: String, found: String },

    #[error("tangent vector is not tangent to S³ at q: |<q, u_q>| = {0:e}")]
    NotTangent(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("non-finite value encountered at step {step}")]
    NonFinite { step: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
