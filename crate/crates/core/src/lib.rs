//! Qumode variational quantum deflation.
//!
//! Dense simulation of truncated multimode Fock registers, the SNAP /
//! displacement / beam-splitter / squeezing gate set, particle-number
//! filtering of Jordan-Wigner Hamiltonians, fragment-based vibrational
//! energy evaluation, amplitude-damping noise, and a deflation solver that
//! extracts ground and excited states one at a time. Every solver path can
//! be checked against exact diagonalization.

pub mod electronic;
pub mod error;
pub mod fock;
pub mod fragments;
pub mod gates;
pub mod noise;
pub mod runner;
pub mod vqd;

pub use error::{Error, Result};
pub use fock::{
    exact_diagonalize, expectation, lowering_op, matrix_exp, number_op, overlap, raising_op,
    C64, CMatrix, CVector, DenseHamiltonian, DensityMatrix, Eigenpair, FockSpace,
    HamiltonianMetadata, OperatorMatrix, StateVector,
};
