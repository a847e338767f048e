//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IpmError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("metric {metric} is not valid for this model: {message}")]
    MetricIncompatible { metric: String, message: String },

    #[error("H^-1 inner product requires mean-zero arguments (|mean| = {mean:.3e})")]
    NonZeroMean { mean: f64 },

    #[error("eigensolver failed to converge: best residual {residual:.3e} after {iterations} iterations")]
    EigenFailure { residual: f64, iterations: usize },

    #[error("insufficient data: {message}")]
    InsufficientData { message: String },
}

pub type Result<T> = std::result::Result<T, IpmError>;
