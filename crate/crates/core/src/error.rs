use thiserror::Error;

/// Errors surfaced by the numerical kernel and the search layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |M - M^dag| entry = {deviation:.3e}")]
    NonHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue = {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("state trace is {trace:.12} instead of 1")]
    TraceNotOne { trace: f64 },

    #[error("operator is not a projector: max deviation {deviation:.3e}")]
    InvalidProjector { deviation: f64 },

    #[error("POVM invalid: {reason}")]
    InvalidPovm { reason: String },

    #[error("expectation value has imaginary residue {residue:.3e}")]
    ImaginaryResidue { residue: f64 },

    #[error("scenario too large to enumerate ({bits} strategy bits, limit {limit})")]
    ScenarioTooLarge { bits: u32, limit: u32 },

    #[error("extension witnesses are on different sides")]
    SideMismatch,

    #[error("conditional scheme branch table is incomplete: missing pattern {pattern:?}")]
    IncompleteScheme { pattern: Vec<usize> },

    #[error("flag projectors are not mutually orthogonal (overlap {overlap:.3e})")]
    NonOrthogonalFlags { overlap: f64 },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
