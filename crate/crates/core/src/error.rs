use thiserror::Error;

/// Errors shared across the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("operator too large for dense representation: {n} qubits (guard {max})")]
    TooLarge { n: usize, max: usize },
    #[error("operator is not hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("operator is neither hermitian nor anti-hermitian (residuals {herm:.3e} / {anti:.3e})")]
    NotNormalizable { herm: f64, anti: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("shift-rule synthesis failed: {0}")]
    Synthesis(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
