use rand::Rng;

use super::linalg::{eigh, hermitian_defect};
use super::{CMatrix, CVector, FockSpace, OperatorMatrix, C64, EXPECTATION_IMAG_TOL, HERMITIAN_TOL};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// Normalized pure state on a Fock register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: FockSpace,
    amplitudes: CVector,
}

impl StateVector {
    pub fn vacuum(space: FockSpace) -> Self {
        Self::basis(space, 0).expect("index 0 always exists")
    }

    pub fn basis(space: FockSpace, index: usize) -> Result<Self> {
        let n = space.total_dim();
        if index >= n {
            return Err(Error::arg(format!("basis index {index} out of range {n}")));
        }
        let mut amplitudes = CVector::zeros(n);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { space, amplitudes })
    }

    /// Normalizes `amplitudes`; fails on length mismatch, zero norm or
    /// non-finite entries.
    pub fn from_amplitudes(space: FockSpace, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::arg(format!(
                "{} amplitudes for a register of dimension {}",
                amplitudes.len(),
                space.total_dim()
            )));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::arg("state must have finite, nonzero norm"));
        }
        Ok(Self {
            space,
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub(crate) fn from_normalized(space: FockSpace, amplitudes: CVector) -> Self {
        debug_assert!((amplitudes.norm() - 1.0).abs() < 1e-8);
        Self { space, amplitudes }
    }

    /// Uniformly random complex amplitudes, normalized.
    pub fn random<R: Rng + ?Sized>(space: FockSpace, rng: &mut R) -> Self {
        let n = space.total_dim();
        let v = CVector::from_fn(n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        Self::from_amplitudes(space, v).expect("random vector is nonzero")
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.space.ensure_same(&other.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Apply a unitary operator. The result is not renormalized.
    pub fn apply(&self, op: &OperatorMatrix) -> Result<StateVector> {
        self.space.ensure_same(op.space())?;
        if !op.is_unitary() {
            return Err(Error::arg("only unitary operators can act on a normalized state"));
        }
        Ok(Self {
            space: self.space,
            amplitudes: op.matrix() * &self.amplitudes,
        })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < NORM_TOL
    }
}

/// Trace-one, Hermitian, positive semidefinite operator on a Fock register.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: FockSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::arg("density matrix shape does not match register"));
        }
        let rho = Self { space, matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_parts(space: FockSpace, matrix: CMatrix) -> Self {
        Self { space, matrix }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        Self {
            space: *state.space(),
            matrix: a * a.adjoint(),
        }
    }

    pub fn vacuum(space: FockSpace) -> Self {
        Self::from_pure(&StateVector::vacuum(space))
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.matrix).0.first().copied().unwrap_or(0.0)
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let defect = hermitian_defect(&self.matrix);
        if defect >= HERMITIAN_TOL {
            return Err(Error::Numerical(format!("density matrix not Hermitian ({defect:e})")));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() >= NORM_TOL || tr.im.abs() >= NORM_TOL {
            return Err(Error::Numerical(format!("density matrix trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-9 {
            return Err(Error::Numerical(format!("density matrix has eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `U rho U^dagger`.
    pub fn conjugate_by(&self, u: &OperatorMatrix) -> Result<DensityMatrix> {
        self.space.ensure_same(u.space())?;
        if !u.is_unitary() {
            return Err(Error::arg("conjugation requires a unitary operator"));
        }
        let m = u.matrix() * &self.matrix * u.matrix().adjoint();
        Ok(Self {
            space: self.space,
            matrix: m,
        })
    }
}

/// Anything an expectation value can be taken on.
pub trait ExpectationTarget {
    fn space(&self) -> &FockSpace;
    /// Raw complex `<A>` before the imaginary residue is checked.
    fn raw_expectation(&self, obs: &CMatrix) -> C64;
}

impl ExpectationTarget for StateVector {
    fn space(&self) -> &FockSpace {
        &self.space
    }

    fn raw_expectation(&self, obs: &CMatrix) -> C64 {
        self.amplitudes.dotc(&(obs * &self.amplitudes))
    }
}

impl ExpectationTarget for DensityMatrix {
    fn space(&self) -> &FockSpace {
        &self.space
    }

    fn raw_expectation(&self, obs: &CMatrix) -> C64 {
        // Tr(rho A) without forming the product
        let n = obs.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * obs[(j, i)];
            }
        }
        acc
    }
}

/// `<psi|A|psi>` or `Tr(rho A)` for a Hermitian observable.
pub fn expectation<S: ExpectationTarget + ?Sized>(state: &S, obs: &OperatorMatrix) -> Result<f64> {
    state.space().ensure_same(obs.space())?;
    if !obs.is_hermitian() {
        return Err(Error::arg("expectation requires a Hermitian observable"));
    }
    let z = state.raw_expectation(obs.matrix());
    let scale = super::max_abs(obs.matrix()).max(1.0);
    if z.im.abs() >= EXPECTATION_IMAG_TOL * scale {
        return Err(Error::Numerical(format!("expectation has imaginary part {:e}", z.im)));
    }
    Ok(z.re)
}

/// `|<a|b>|^2`.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}
