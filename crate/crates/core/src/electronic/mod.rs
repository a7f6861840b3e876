//! Electronic-structure Hamiltonians: ingestion, Jordan-Wigner matrices and
//! particle-number sector restriction.

mod fermion;
mod symmetry;

pub use fermion::{
    jordan_wigner_to_matrix, parse_electronic_hamiltonian, ElectronicMetadata, FermionTerm, FermionicHamiltonian,
    LadderOp, MAX_JW_ORBITALS,
};
pub use symmetry::{
    binomial, compression_report, embed_in_register, filter_by_particle_number, hamming_weight, qumodes_needed,
    stirling_central_binomial, CompressionReport, RegisterEmbedding, SYMMETRY_TOL,
};
