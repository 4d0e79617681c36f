use thiserror::Error;

use crate::word::Signature;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("letter {letter} is outside signature {signature}")]
    IndexOutOfSignature { letter: String, signature: Signature },

    #[error("polynomial is not self-adjoint: coefficient of {word} does not match its adjoint")]
    NotSelfAdjoint { word: String },

    #[error("coefficient shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    CoefficientShape { expected: usize, rows: usize, cols: usize },

    #[error("signature mismatch: polynomial {poly}, lift {other}")]
    SignatureMismatch { poly: Signature, other: Signature },

    #[error("lift size n={n} must be even when d > 0")]
    OddLiftSize { n: usize },

    #[error("invalid lift size n={0}")]
    LiftTooSmall(usize),

    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    ResourceCap { what: &'static str, needed: u128, cap: u128 },

    #[error("dimension {dim} exceeds the dense cutoff {cutoff}")]
    DimensionOverCutoff { dim: usize, cutoff: usize },

    #[error("eigensolver did not converge after {restarts} restarts (best residual {residual:.3e})")]
    NonConvergence { restarts: usize, residual: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("instance too large for brute force: N={n} > {max}")]
    TooLarge { n: usize, max: usize },

    #[error("constraint residual {residual:.3e} exceeds eta={eta:.3e}")]
    EtaExceeded { residual: f64, eta: f64 },

    #[error("rank-reduction LP is infeasible (input was not feasible)")]
    LpInfeasible,

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("unknown builtin polynomial `{0}`")]
    UnknownBuiltin(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
