//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("segmentation error: M = {m} does not divide N = {n}")]
    Segmentation { m: usize, n: usize },

    #[error("SNR is undefined for a zero signal")]
    UndefinedSnr,

    #[error("noise variance must be non-negative, got {0}")]
    NegativeNoiseVariance(f64),

    #[error("shift tag {s} out of range 1..={k}")]
    ShiftOutOfRange { s: usize, k: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("family supports at most K*I = {max} additional rows, requested {requested}")]
    InsufficientFamily { requested: usize, max: usize },

    #[error(
        "exhaustive sweep needs {subsets} subsets, above the cap of {cap}; \
         use monte_carlo mode"
    )]
    SubsetBudget { subsets: u128, cap: usize },

    #[error("delta_S must lie in (0, 1), got {0}")]
    DeltaOutOfRange(f64),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("solver did not converge within {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        /// Best iterate found before giving up.
        best: Box<nalgebra::DVector<f64>>,
    },

    #[error("C1e is undefined: a = {a} >= 1")]
    UndefinedConstant { a: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("failure budget exceeded: {failed}/{trials} trials failed (budget {budget})")]
    FailureBudget {
        failed: usize,
        trials: usize,
        budget: f64,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
