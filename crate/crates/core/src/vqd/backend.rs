use crate::error::Result;
use crate::fock::{CVector, DenseHamiltonian, FockSpace};
use crate::fragments::{FragmentSet, PreparedFragments};

/// Source of `<psi|H|psi>` and `H psi` for the optimizer.
pub trait EnergyBackend: Sync {
    fn space(&self) -> &FockSpace;

    fn apply(&self, psi: &CVector) -> CVector;

    fn energy(&self, psi: &CVector) -> f64 {
        psi.dotc(&self.apply(psi)).re
    }

    fn descriptor(&self) -> String;
}

#[derive(Clone, Debug)]
pub struct DenseBackend {
    hamiltonian: DenseHamiltonian,
}

impl DenseBackend {
    pub fn new(hamiltonian: DenseHamiltonian) -> Self {
        Self { hamiltonian }
    }

    pub fn hamiltonian(&self) -> &DenseHamiltonian {
        &self.hamiltonian
    }
}

impl EnergyBackend for DenseBackend {
    fn space(&self) -> &FockSpace {
        self.hamiltonian.space()
    }

    fn apply(&self, psi: &CVector) -> CVector {
        self.hamiltonian.apply(psi)
    }

    fn descriptor(&self) -> String {
        format!("dense[{}] {}", self.hamiltonian.dimension(), self.hamiltonian.metadata().source)
    }
}

/// Evaluates `sum_k <psi| U_k D_k U_k^dag |psi>` fragment by fragment.
#[derive(Clone, Debug)]
pub struct FragmentBackend {
    fragments: PreparedFragments,
}

impl FragmentBackend {
    pub fn new(fs: &FragmentSet) -> Result<Self> {
        Ok(Self {
            fragments: PreparedFragments::new(fs)?,
        })
    }

    pub fn prepared(&self) -> &PreparedFragments {
        &self.fragments
    }
}

impl EnergyBackend for FragmentBackend {
    fn space(&self) -> &FockSpace {
        self.fragments.space()
    }

    fn apply(&self, psi: &CVector) -> CVector {
        self.fragments.apply(psi)
    }

    fn energy(&self, psi: &CVector) -> f64 {
        self.fragments.energy(psi)
    }

    fn descriptor(&self) -> String {
        format!("fragments[{}] x{}", self.fragments.space().total_dim(), self.fragments.len())
    }
}
