//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows()];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            *o += m[(i, j)] * xj;
        }
    }
    out
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol * m.amax().max(1.0)
}

pub fn is_normal(m: &DMatrix<f64>, tol: f64) -> bool {
    let a = m * m.transpose();
    let b = m.transpose() * m;
    (a - b).amax() <= tol * m.amax().max(1.0).powi(2)
}

/// Largest real part of the spectrum.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    m.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Symmetric positive semidefinite square root.
pub fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !is_symmetric(m, 1e-10) {
        return Err(invalid("matrix square root needs a symmetric matrix"));
    }
    let eig = m.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.iter().any(|&l| l < -1e-10 * scale) {
        return Err(invalid("matrix is not positive semidefinite"));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

pub fn is_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    if !is_symmetric(m, 1e-10) {
        return false;
    }
    let eig = m.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    eig.eigenvalues.iter().all(|&l| l >= -tol * scale)
}

/// Cholesky-like factor `L` with `L L^T = m` for a PSD matrix (via the
/// eigendecomposition, so singular matrices are fine).
pub fn psd_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    psd_sqrt(m)
}

/// `∫_0^t e^{sB} v ds` through the augmented matrix exponential.
pub fn integrated_exp_apply(b: &DMatrix<f64>, v: &[f64], t: f64) -> Vec<f64> {
    let d = b.nrows();
    let mut aug = DMatrix::zeros(d + 1, d + 1);
    aug.view_mut((0, 0), (d, d)).copy_from(&(b * t));
    for i in 0..d {
        aug[(i, d)] = v[i] * t;
    }
    let e = aug.exp();
    (0..d).map(|i| e[(i, d)]).collect()
}

pub fn to_dvector(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}
