//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a mathematical precondition (bad exponent range, negative
    /// conductivity, point outside the period cell, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    /// Adaptive quadrature hit its depth cap. Carries the partial value so the
    /// caller can still report it.
    #[error("quadrature did not converge: partial value {partial:.6e}, error estimate {error:.3e}")]
    Quadrature { partial: f64, error: f64 },

    /// An iterative solver stopped at its cap; `achieved` is the last measured
    /// contraction ratio or residual.
    #[error("solver did not converge: {detail} (achieved {achieved:.3e})")]
    NonConvergence { detail: String, achieved: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
