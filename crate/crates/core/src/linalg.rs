//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative eigenvalue cutoff below which a direction counts as null.
pub const PINV_RTOL: f64 = 1e-12;

/// Moore-Penrose inverse of a real symmetric matrix via its eigendecomposition.
///
/// Eigenvalues with magnitude at most `PINV_RTOL · max|λ|` are treated as zero.
pub fn pinv_symmetric(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let cutoff = PINV_RTOL * eig.eigenvalues.amax();
    let inv = eig
        .eigenvalues
        .map(|l| if l.abs() > cutoff { 1.0 / l } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

/// Largest entrywise absolute difference.
pub fn max_abs_diff<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x.clone() - y.clone()).modulus())
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_min_eigenvalue(a: &DMatrix<Complex64>) -> f64 {
    let h = hermitian_part(a);
    SymmetricEigen::new(h).eigenvalues.min()
}

/// `(A + A†)/2`.
pub fn hermitian_part(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (a + a.adjoint()).scale(0.5)
}

/// `A^{-1/2}` for Hermitian positive definite `A`.
pub fn hermitian_inv_sqrt(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let max = eig.eigenvalues.amax();
    if eig.eigenvalues.iter().any(|&l| !(l > 1e-12 * max)) {
        return Err(Error::Numerical("matrix is not positive definite".into()));
    }
    let d = eig.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0));
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint())
}
