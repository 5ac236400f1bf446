//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by the numerical layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian within tolerance (max |A - A†| entry = {max_dev:e})")]
    NotHermitian { max_dev: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps (residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e} below -{clip_tol:e})")]
    NotPsd { eigenvalue: f64, clip_tol: f64 },

    #[error("fractional power exponent {0} outside [0, 1]")]
    ExponentOutOfRange(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix entries must be finite")]
    NonFiniteEntries,

    #[error("trace deviates from one by {0:e}")]
    TraceNotUnit(f64),

    #[error("ensemble weights invalid: {0}")]
    InvalidWeights(String),

    #[error("POVM operators do not resolve the identity (max deviation {0:e})")]
    InvalidPovm(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("mixture has numerical rank zero")]
    DegenerateMixture,

    #[error("unitary family rates must be pairwise distinct")]
    DuplicateRates,

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("window [{lo}, {hi}] outside the sweep grid span")]
    WindowOutOfRange { lo: f64, hi: f64 },

    #[error("quadrature scheme does not cover the density support: {0}")]
    SchemeMismatch(String),

    #[error("partition invalid: {0}")]
    BadPartition(String),

    #[error("rank {rank} outside 1..={dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("search failed: {0}")]
    SearchFailed(String),

    #[error("artifact I/O failed: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
