use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("degenerate sample {sample}: |y| below 1e-12")]
    DegenerateSample { sample: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fundamental tensor is not positive definite at {sample}")]
    NotPositiveDefinite { sample: String },
    #[error("invalid Finsler structure: {0}")]
    InvalidStructure(String),
    #[error("invalid vector field: {0}")]
    InvalidField(String),
    #[error("invalid diffeomorphism: {0}")]
    InvalidDiffeo(String),
    #[error("flow integration produced a non-finite state at t = {time}")]
    FlowBlowUp { time: f64 },
    #[error("t = {t} is outside the flow domain; tau(t) = 1 - 2 lambda t vanishes at t = {critical_time}")]
    DomainExceeded { t: f64, critical_time: f64 },
    #[error("structure is not Einstein: Ricci spread {spread:e} exceeds {tolerance:e} at t = {time}")]
    NotEinstein { spread: f64, tolerance: f64, time: f64 },
    #[error("conformal factor reached {value} at t = {time}")]
    StepUnderflow { time: f64, value: f64 },
    #[error("empty sample list")]
    EmptySamples,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("rank-deficient design matrix: the soliton constant is undetermined (singular values {singular_values:?})")]
    RankDeficient { singular_values: Vec<f64> },
    #[error("{0}")]
    Invalid(String),
}
