//! Error types shared across the solver.

use thiserror::Error;

/// Errors produced by the numerical kernels and solver layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at a point where the function diverges (e.g. K at 0).
    #[error("singular argument: {0}")]
    Singularity(String),

    /// An unscaled intermediate exceeded the double-precision range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// The reflection denominator vanished at the requested Laplace point.
    #[error("pole hit at s = {s}; perturb s and retry")]
    PoleHit { s: f64 },

    /// A quadrature or series failed to reach the requested accuracy.
    #[error("accuracy not reached: {0}")]
    Accuracy(String),

    /// Residue extraction found a vanishing denominator derivative.
    #[error("degenerate pole at s = {s}: |R2'| below noise floor")]
    DegeneratePole { s: f64 },

    /// No decay mode could be found for the configuration.
    #[error("no pole found in the scan range")]
    NoMode,

    /// A supplied evaluator returned a non-finite value.
    #[error("evaluator returned a non-finite value at {0}")]
    NonFinite(String),

    /// Configuration unsupported by the operation (e.g. wrong stack topology).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
