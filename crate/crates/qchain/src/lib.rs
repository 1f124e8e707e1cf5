//! Random qubit-chain Hamiltonians: Pauli algebra, ensemble sampling, spectral
//! statistics, reduced-state purity, free-fermion solvers and the two-qubit
//! joint eigenvalue density.

pub mod cli;
pub mod degeneracy;
pub mod ensembles;
pub mod entanglement;
pub mod error;
pub mod free_fermion;
pub mod hciz;
pub mod linalg;
pub mod pauli;
pub mod quadrature;
pub mod sectors;
pub mod spectra;
pub mod stats;
pub mod unfolding;

pub use error::{Error, Result};
