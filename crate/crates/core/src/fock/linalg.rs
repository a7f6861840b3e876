use nalgebra::DMatrix;

use super::{CMatrix, OperatorMatrix, C64};
use crate::error::{Error, Result};

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |A - A^dagger|` entrywise.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn anti_hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] + m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |U^dagger U - I|` entrywise.
pub fn unitary_defect(m: &CMatrix) -> f64 {
    let p = m.adjoint() * m;
    let n = p.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

pub(crate) fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns. Only the Hermitian part of
/// `m` is used.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub(crate) fn from_eigen(vectors: &CMatrix, diag: impl Fn(usize) -> C64) -> CMatrix {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for j in 0..n {
        let f = diag(j);
        for i in 0..n {
            scaled[(i, j)] *= f;
        }
    }
    scaled * vectors.adjoint()
}

pub(crate) fn exp_matrix(m: &CMatrix) -> Result<(CMatrix, bool, bool)> {
    if !m.is_square() {
        return Err(Error::arg("matrix exponential needs a square matrix"));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::arg("matrix exponential of a non-finite matrix"));
    }
    let scale = max_abs(m).max(1.0);
    if anti_hermitian_defect(m) <= 1e-12 * scale {
        // m = iK with K Hermitian
        let k = m.map(|z| C64::new(z.im, -z.re));
        let (values, vectors) = eigh(&k);
        let u = from_eigen(&vectors, |j| C64::from_polar(1.0, values[j]));
        return Ok((u, false, true));
    }
    if hermitian_defect(m) <= 1e-12 * scale {
        let (values, vectors) = eigh(m);
        let e = from_eigen(&vectors, |j| C64::new(values[j].exp(), 0.0));
        return Ok((hermitize(&e), true, false));
    }
    let e: DMatrix<C64> = m.clone().exp();
    Ok((e, false, false))
}

/// `e^A`. Hermitian and anti-Hermitian inputs go through an eigendecomposition,
/// so exponentials of anti-Hermitian generators are unitary by construction;
/// anything else uses scaling and squaring.
pub fn matrix_exp(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    let (e, hermitian, unitary) = exp_matrix(a.matrix())?;
    Ok(OperatorMatrix::from_parts(*a.space(), e, hermitian, unitary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockSpace;

    fn op(m: CMatrix) -> OperatorMatrix {
        let s = FockSpace::single_mode(m.nrows()).unwrap();
        OperatorMatrix::new(s, m).unwrap()
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = matrix_exp(&op(CMatrix::zeros(5, 5))).unwrap();
        assert!(max_abs(&(e.matrix() - CMatrix::identity(5, 5))) < 1e-15);
    }

    #[test]
    fn exp_of_imaginary_diagonal() {
        let thetas = [0.3, -1.2, 2.5, 0.0];
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            4,
            thetas.iter().map(|&t| C64::new(0.0, t)),
        ));
        let e = matrix_exp(&op(m)).unwrap();
        assert!(e.is_unitary());
        for (i, &t) in thetas.iter().enumerate() {
            assert!((e.matrix()[(i, i)] - C64::from_polar(1.0, t)).norm() < 1e-14);
        }
    }

    #[test]
    fn general_route_matches_series() {
        // upper-triangular nilpotent part: e^{[[a, b], [0, c]]}
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(1.0, 0.2), C64::new(0.0, 0.0), C64::new(-0.3, 0.0)],
        );
        let e = matrix_exp(&op(m)).unwrap();
        let (a, c) = (0.5f64, -0.3f64);
        let off = C64::new(1.0, 0.2) * (a.exp() - c.exp()) / (a - c);
        assert!((e.matrix()[(0, 0)].re - a.exp()).abs() < 1e-12);
        assert!((e.matrix()[(1, 1)].re - c.exp()).abs() < 1e-12);
        assert!((e.matrix()[(0, 1)] - off).norm() < 1e-12);
    }

    #[test]
    fn exp_rejects_nan() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        let s = FockSpace::single_mode(2).unwrap();
        let a = OperatorMatrix::from_parts(s, m, false, false);
        assert!(matches!(matrix_exp(&a), Err(Error::Argument(_))));
    }
}
