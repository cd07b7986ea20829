use thiserror::Error;

use crate::liealg::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model failed validation: {}", .0.failures().join("; "))]
    ModelValidation(Box<ValidationReport>),

    #[error("inner product on k is not symmetric positive-definite")]
    NotPositiveDefinite,

    #[error("model is not in an orthonormal frame; orthonormalize it first")]
    NotOrthonormal,

    #[error("zero vector is outside the slit tangent space")]
    ZeroVector,

    #[error("norm bound violated: b = {0} must satisfy 0 <= b < 1")]
    NormBound(f64),

    #[error("metric is not a Finsler metric at b = {b}: {reason}")]
    InvalidMetric { b: f64, reason: String },

    #[error("invalid phi: {0}")]
    InvalidPhi(String),

    #[error("invalid curvature context: {0}")]
    InvalidContext(String),

    #[error("singular context at s = {s}: {what} vanishes")]
    Singular { s: f64, what: &'static str },

    #[error("no closed form is available for the {0} family")]
    NoClosedForm(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("exponent overflow in polynomial arithmetic")]
    ExponentOverflow,

    #[error("rational function with a zero denominator")]
    ZeroDenominator,

    #[error("parse error: {0}")]
    Parse(String),
}
