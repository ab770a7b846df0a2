//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimMismatch { op: &'static str, detail: String },

    #[error("matrix is not symmetric within tolerance (max asymmetry {max_asym})")]
    NotSymmetric { max_asym: f64 },

    #[error("matrix is not positive definite (lambda_min = {lambda_min})")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("rank-deficient matrix in {op} (condition estimate {cond:.3e})")]
    RankDeficient { op: &'static str, cond: f64 },

    #[error("non-finite value encountered in {op} at step {step}")]
    NonFinite { op: &'static str, step: usize },

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("atoms closer than contact tolerance (r = {r:.3e} between {i} and {j})")]
    AtomOverlap { i: usize, j: usize, r: f64 },

    #[error("n*p is not a positive integer (n = {n}, p = {num}/{den})")]
    NonIntegralSelection { n: usize, num: u64, den: u64 },

    #[error("mask size {got} does not match n*p = {want}")]
    MaskSize { got: usize, want: usize },

    #[error("mask index {index} out of range for {n} particles")]
    MaskIndex { index: usize, n: usize },

    #[error("dataset requires p = 1 (full forces) for this loss")]
    RequiresFullForces,

    #[error("requested {requested} samples but sampling plan yields only {available}")]
    NotEnoughSamples { requested: usize, available: usize },

    #[error("training diverged (loss not finite) at epoch {epoch}, step {step}")]
    Diverged { epoch: usize, step: usize },

    #[error("file format error in {path}: {detail}")]
    Format { path: String, detail: String },

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("zero denominator in relative error metric")]
    ZeroDenominator,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
