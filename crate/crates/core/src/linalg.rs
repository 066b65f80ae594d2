//! Small dense complex linear algebra used throughout the crate.
//!
//! Everything here works on [`CMat`], a dynamically sized complex matrix. The
//! only decomposition we need is the Hermitian eigendecomposition; square
//! roots, inverse square roots and pseudo-inverses are all built on top of it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// Returns `(M + M*) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Entrywise max-modulus norm.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

/// Eigenvalues (ascending) and the matching unitary eigenvector matrix of a
/// Hermitian matrix. Only the Hermitian part of `m` is used.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(m.nrows(), m.ncols(), |r, col| {
        eig.eigenvectors[(r, order[col])]
    });
    (values, vectors)
}

fn spectral_function(m: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (values, u) = hermitian_eigen(m);
    let smallest = values.first().copied().unwrap_or(0.0);
    if !(smallest > 0.0) {
        return Err(Error::NotPositiveDefinite(smallest));
    }
    let scaled = CMat::from_fn(u.nrows(), u.ncols(), |r, col| u[(r, col)] * f(values[col]));
    Ok(hermitian_part(&(scaled * u.adjoint())))
}

/// Principal square root of a Hermitian positive definite matrix.
pub fn hermitian_sqrt(m: &CMat) -> Result<CMat> {
    spectral_function(m, f64::sqrt)
}

/// Inverse of the principal square root, `M^{-1/2}`.
pub fn hermitian_inv_sqrt(m: &CMat) -> Result<CMat> {
    spectral_function(m, |x| 1.0 / x.sqrt())
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(f64::NAN)
}

/// Largest eigenvalue of the Hermitian part.
pub fn max_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(f64::NAN)
}

/// `‖M*M − I‖_∞` (entrywise max).
pub fn unitarity_defect(m: &CMat) -> f64 {
    let n = m.ncols();
    max_abs(&(m.adjoint() * m - CMat::identity(n, n)))
}

/// Matrix-vector product on plain slices.
pub fn apply(m: &CMat, v: &[C64]) -> Vec<C64> {
    let out = m * CVec::from_column_slice(v);
    out.iter().copied().collect()
}

/// `max_i |a_i − b_i|`.
pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}
