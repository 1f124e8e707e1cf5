use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} out of range for a chain of {n} qubits")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("qubit count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dense matrices limited to {max} qubits (requested {n}); raise the budget with set_dense_budget")]
    DenseBudget { n: usize, max: usize },
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("LAPACK routine {routine} failed with info = {info}")]
    Solver { routine: &'static str, info: i32 },
    #[error("unsupported term: {0}")]
    Unsupported(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
