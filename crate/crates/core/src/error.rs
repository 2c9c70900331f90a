use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure mode of the laboratory.
///
/// Probe outcomes (PASS / FAIL / INCONCLUSIVE) are *values* of type
/// [`Verdict`](crate::Verdict); this enum is reserved for inputs that cannot
/// be probed at all.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("kink: {0}")]
    Kink(String),

    #[error("discontinuity: {0}")]
    Discontinuity(String),

    #[error("not differentiable: {0}")]
    NotDifferentiable(String),

    #[error("order {requested} exceeds the truncation cap {max}")]
    OrderTooHigh { requested: usize, max: usize },

    #[error("jet order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("coincident nodes at positions {i} and {j}")]
    CoincidentNodes { i: usize, j: usize },

    #[error("expression uses variable #{index} but only {available} inputs are bound")]
    Arity { index: usize, available: usize },

    #[error("base point mismatch: plaque passes through {found:?}, expected {expected:?}")]
    BasePointMismatch { expected: Vec<f64>, found: Vec<f64> },

    #[error("witness `{label}` is not smooth along the generators")]
    InvalidWitness { label: String },

    #[error("structure function `{label}` is not smooth along the curve family")]
    InconsistentPair { label: String },

    #[error("diffeology has no curves to extract")]
    NoCurves,

    #[error("no generator passes through {point:?}")]
    NoCurveThroughPoint { point: Vec<f64> },

    #[error("no weak derivative: residual {residual:e}")]
    NoWeakDerivative { residual: f64 },

    #[error("unknown gallery entry `{0}`")]
    UnknownEntry(String),

    #[error("unknown claim `{claim}` for entry `{entry}`")]
    UnknownClaim { entry: String, claim: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Errors that mean "this object is not smooth here" rather than "bad input".
    pub fn is_non_smooth(&self) -> bool {
        matches!(
            self,
            Error::Kink(_) | Error::Discontinuity(_) | Error::NotDifferentiable(_)
        )
    }
}
