use super::linalg::{hermitian_defect, max_abs, unitary_defect};
use super::{embed_local, CMatrix, FockSpace, C64, HERMITIAN_TOL, UNITARY_TOL};
use crate::error::{Error, Result};

/// Square operator over a Fock register together with the structural
/// properties that were verified when it was built.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    space: FockSpace,
    matrix: CMatrix,
    hermitian: bool,
    unitary: bool,
}

impl OperatorMatrix {
    /// Wrap a matrix; the Hermitian flag is detected, the unitary flag is not.
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        check_shape(&space, &matrix)?;
        let hermitian = hermitian_defect(&matrix) < HERMITIAN_TOL;
        Ok(Self {
            space,
            matrix,
            hermitian,
            unitary: false,
        })
    }

    pub fn hermitian(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        check_shape(&space, &matrix)?;
        let defect = hermitian_defect(&matrix);
        if defect >= HERMITIAN_TOL {
            return Err(Error::arg(format!("operator is not Hermitian (defect {defect:e})")));
        }
        Ok(Self {
            space,
            matrix,
            hermitian: true,
            unitary: false,
        })
    }

    pub fn unitary(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        check_shape(&space, &matrix)?;
        let defect = unitary_defect(&matrix);
        if defect >= UNITARY_TOL {
            return Err(Error::arg(format!("operator is not unitary (defect {defect:e})")));
        }
        let hermitian = hermitian_defect(&matrix) < HERMITIAN_TOL;
        Ok(Self {
            space,
            matrix,
            hermitian,
            unitary: true,
        })
    }

    pub(crate) fn from_parts(space: FockSpace, matrix: CMatrix, hermitian: bool, unitary: bool) -> Self {
        debug_assert_eq!(matrix.nrows(), space.total_dim());
        Self {
            space,
            matrix,
            hermitian,
            unitary,
        }
    }

    pub fn identity(space: FockSpace) -> Self {
        let n = space.total_dim();
        Self::from_parts(space, CMatrix::identity(n, n), true, true)
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.space, self.matrix.adjoint(), self.hermitian, self.unitary)
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &OperatorMatrix) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        let m = &self.matrix * &other.matrix;
        let hermitian = hermitian_defect(&m) < HERMITIAN_TOL;
        Ok(Self::from_parts(self.space, m, hermitian, self.unitary && other.unitary))
    }

    /// `max |[A, B]|` entrywise.
    pub fn commutator_norm(&self, other: &OperatorMatrix) -> Result<f64> {
        self.space.ensure_same(&other.space)?;
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Ok(max_abs(&c))
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitary_defect(&self.matrix)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermitian_defect(&self.matrix)
    }

    pub fn scale(&self, factor: C64) -> Self {
        let m = self.matrix.map(|z| z * factor);
        let hermitian = factor.im == 0.0 && self.hermitian;
        Self::from_parts(self.space, m, hermitian, false)
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        let m = &self.matrix + &other.matrix;
        let hermitian = self.hermitian && other.hermitian;
        Ok(Self::from_parts(self.space, m, hermitian, false))
    }
}

fn check_shape(space: &FockSpace, m: &CMatrix) -> Result<()> {
    let n = space.total_dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::arg(format!(
            "matrix is {}x{}, register dimension is {n}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Single-mode annihilation operator on `d` levels: `<n-1| a |n> = sqrt(n)`.
pub fn local_lowering(d: usize) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn local_number(d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for n in 0..d {
        m[(n, n)] = C64::new(n as f64, 0.0);
    }
    m
}

pub fn lowering_op(space: &FockSpace, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let m = embed_local(space, &[mode], &local_lowering(space.cutoff()))?;
    Ok(OperatorMatrix::from_parts(*space, m, space.cutoff() == 1, false))
}

pub fn raising_op(space: &FockSpace, mode: usize) -> Result<OperatorMatrix> {
    Ok(lowering_op(space, mode)?.adjoint())
}

pub fn number_op(space: &FockSpace, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let m = embed_local(space, &[mode], &local_number(space.cutoff()))?;
    Ok(OperatorMatrix::from_parts(*space, m, true, false))
}

/// Sum of the number operators of every mode.
pub fn total_number_op(space: &FockSpace) -> OperatorMatrix {
    let n = space.total_dim();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(space.total_occupation(i) as f64, 0.0);
    }
    OperatorMatrix::from_parts(*space, m, true, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_lowering() {
        let s = FockSpace::single_mode(2).unwrap();
        let a = lowering_op(&s, 0).unwrap();
        let expect = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        );
        assert_eq!(a.matrix(), &expect);
    }

    #[test]
    fn lowering_entry_sqrt_three() {
        let s = FockSpace::single_mode(4).unwrap();
        let a = lowering_op(&s, 0).unwrap();
        assert!((a.matrix()[(2, 3)].re - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lowering_on_mode_one_commutes_with_number_on_mode_zero() {
        let s = FockSpace::new(2, 3).unwrap();
        let a1 = lowering_op(&s, 1).unwrap();
        let n0 = number_op(&s, 0).unwrap();
        assert!(a1.commutator_norm(&n0).unwrap() < 1e-12);
    }

    #[test]
    fn number_op_diag_and_product_form() {
        let s = FockSpace::single_mode(3).unwrap();
        let n = number_op(&s, 0).unwrap();
        for k in 0..3 {
            assert_eq!(n.matrix()[(k, k)].re, k as f64);
        }
        let a = lowering_op(&s, 0).unwrap();
        let ada = a.adjoint().compose(&a).unwrap();
        assert!(max_abs(&(ada.matrix() - n.matrix())) < 1e-14);
    }

    #[test]
    fn total_number_two_qubit_modes() {
        let s = FockSpace::new(2, 2).unwrap();
        let total = number_op(&s, 0).unwrap().add(&number_op(&s, 1).unwrap()).unwrap();
        let (vals, _) = crate::fock::eigh(total.matrix());
        let expect = [0.0, 1.0, 1.0, 2.0];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
        assert_eq!(total.matrix(), total_number_op(&s).matrix());
    }

    #[test]
    fn mode_out_of_range() {
        let s = FockSpace::new(2, 3).unwrap();
        assert!(matches!(lowering_op(&s, 2), Err(Error::Argument(_))));
        assert!(matches!(number_op(&s, 5), Err(Error::Argument(_))));
    }
}
