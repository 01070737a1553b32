use thiserror::Error;

use crate::analytic::PoleStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),
    #[error("mode index {index} out of range for a {modes}-mode space")]
    BadModeIndex { index: usize, modes: usize },
    #[error("operands live on different Hilbert spaces ({left:?} vs {right:?})")]
    SpaceMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("pole encountered: {0}")]
    Pole(PoleStatus),
    #[error("degenerate steady state: {0}")]
    DegenerateSteadyState(String),
    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("truncation gate failed: {0}")]
    ConvergenceGate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
