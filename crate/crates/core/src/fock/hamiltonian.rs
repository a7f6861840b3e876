use serde::{Deserialize, Serialize};

use super::linalg::{eigh, hermitian_defect, hermitize};
use super::{CMatrix, CVector, FockSpace, OperatorMatrix, StateVector, C64, HERMITIAN_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianMetadata {
    pub num_spin_orbitals: Option<usize>,
    pub num_electrons: Option<usize>,
    pub source: String,
}

/// Hermitian matrix over a (possibly symmetry-restricted) basis.
///
/// `basis_labels[i]` is the label of row `i` in the basis the matrix was
/// built in, e.g. the original Jordan-Wigner occupation bitstring after
/// particle-number filtering.
#[derive(Clone, Debug)]
pub struct DenseHamiltonian {
    space: FockSpace,
    matrix: CMatrix,
    basis_labels: Vec<u64>,
    metadata: HamiltonianMetadata,
}

impl DenseHamiltonian {
    pub fn new(
        space: FockSpace,
        matrix: CMatrix,
        basis_labels: Vec<u64>,
        metadata: HamiltonianMetadata,
    ) -> Result<Self> {
        Self::with_tolerance(space, matrix, basis_labels, metadata, HERMITIAN_TOL)
    }

    /// Accepts Hermiticity defects below `tol` and stores the Hermitian part.
    pub fn with_tolerance(
        space: FockSpace,
        matrix: CMatrix,
        basis_labels: Vec<u64>,
        metadata: HamiltonianMetadata,
        tol: f64,
    ) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::arg(format!(
                "Hamiltonian is {}x{}, register dimension is {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if basis_labels.len() != n {
            return Err(Error::arg(format!("{} basis labels for dimension {n}", basis_labels.len())));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InputInconsistency("Hamiltonian has non-finite entries".into()));
        }
        let defect = hermitian_defect(&matrix);
        if defect >= tol {
            return Err(Error::InputInconsistency(format!(
                "Hamiltonian is not Hermitian (defect {defect:e})"
            )));
        }
        if let Some(ne) = metadata.num_electrons {
            if let Some(bad) = basis_labels.iter().find(|l| l.count_ones() as usize != ne) {
                return Err(Error::InputInconsistency(format!(
                    "basis label {bad} does not have Hamming weight {ne}"
                )));
            }
        }
        Ok(Self {
            space,
            matrix: hermitize(&matrix),
            basis_labels,
            metadata,
        })
    }

    /// Single-register Hamiltonian with labels `0..n`.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        let space = FockSpace::single_mode(n)?;
        Self::new(space, matrix, (0..n as u64).collect(), HamiltonianMetadata::default())
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| C64::new(x, 0.0)),
        ));
        Self::from_matrix(m)
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn basis_labels(&self) -> &[u64] {
        &self.basis_labels
    }

    pub fn metadata(&self) -> &HamiltonianMetadata {
        &self.metadata
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.metadata.source = source.into();
        self
    }

    /// Reinterpret the same matrix on a register of equal dimension.
    pub fn on_space(mut self, space: FockSpace) -> Result<Self> {
        if space.total_dim() != self.dimension() {
            return Err(Error::arg(format!(
                "register dimension {} does not match Hamiltonian dimension {}",
                space.total_dim(),
                self.dimension()
            )));
        }
        self.space = space;
        Ok(self)
    }

    pub fn as_operator(&self) -> OperatorMatrix {
        OperatorMatrix::from_parts(self.space, self.matrix.clone(), true, false)
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.dimension();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let radius: f64 = (0..n).filter(|&j| j != i).map(|j| self.matrix[(i, j)].norm()).sum();
            let c = self.matrix[(i, i)].re;
            lo = lo.min(c - radius);
            hi = hi.max(c + radius);
        }
        (lo, hi)
    }

    /// `H psi`.
    pub fn apply(&self, psi: &CVector) -> CVector {
        &self.matrix * psi
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: StateVector,
}

/// Full spectrum in ascending order with normalized eigenvectors.
pub fn exact_diagonalize(h: &DenseHamiltonian) -> Result<Vec<Eigenpair>> {
    let defect = hermitian_defect(h.matrix());
    if defect > 1e-8 {
        return Err(Error::arg(format!("cannot diagonalize: Hermiticity defect {defect:e}")));
    }
    let (values, vectors) = eigh(h.matrix());
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(k, value)| Eigenpair {
            value,
            vector: StateVector::from_normalized(*h.space(), vectors.column(k).into_owned()),
        })
        .collect())
}

/// Ascending eigenvalues only.
pub fn eigenvalues(h: &DenseHamiltonian) -> Vec<f64> {
    eigh(h.matrix()).0
}
