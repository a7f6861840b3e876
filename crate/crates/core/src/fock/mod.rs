//! Dense linear algebra over truncated multimode Fock registers.
//!
//! Basis index `i` of an `N`-mode register with cutoff `d` encodes the
//! per-mode occupations as base-`d` digits, mode 0 least significant. Every
//! module in the crate uses this single convention.

mod hamiltonian;
mod linalg;
mod local;
mod operator;
mod space;
mod state;

pub use hamiltonian::{eigenvalues, exact_diagonalize, DenseHamiltonian, Eigenpair, HamiltonianMetadata};
pub use linalg::{eigh, hermitian_defect, matrix_exp, max_abs, unitary_defect};
pub use local::{embed_local, LocalLayout};
pub use operator::{
    local_lowering, local_number, lowering_op, number_op, raising_op, total_number_op, OperatorMatrix,
};
pub use space::FockSpace;
pub use state::{expectation, overlap, DensityMatrix, ExpectationTarget, StateVector};

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

/// Imaginary residue allowed on an expectation value before it is discarded.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-9;
/// Hermiticity tolerance enforced on stored Hamiltonians and observables.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Unitarity tolerance for truncated gates.
pub const UNITARY_TOL: f64 = 1e-8;
