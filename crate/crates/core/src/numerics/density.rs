//! Validated density matrices and the Uhlmann fidelity.

use super::matrix::{hermitian_eigen, is_hermitian, sqrt_psd, trace, CMatrix, CVector};
use super::DENSITY_TOL;
use crate::error::{Error, Result};

/// A normalized density operator: Hermitian, positive semidefinite and of
/// unit trace within [`DENSITY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        let dim = mat.nrows();
        if dim == 0 || mat.ncols() != dim {
            return Err(Error::InvalidDensity(format!(
                "matrix is {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !is_hermitian(&mat, DENSITY_TOL) {
            return Err(Error::InvalidDensity("not Hermitian".into()));
        }
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace is {}", tr)));
        }
        let (vals, _) = hermitian_eigen(&mat);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("min eigenvalue {}", min)));
        }
        Ok(DensityMatrix { dim, mat })
    }

    /// Wraps a matrix that is valid by construction (internal fast path).
    pub(crate) fn new_unchecked(mat: CMatrix) -> Self {
        let dim = mat.nrows();
        DensityMatrix { dim, mat }
    }

    pub fn pure(v: &CVector) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("vector norm {}", n)));
        }
        Ok(DensityMatrix::new_unchecked(v * v.adjoint()))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix::new_unchecked(CMatrix::identity(dim, dim).unscale(dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }
}

/// Uhlmann fidelity F(ρ, σ) = tr √(√ρ σ √ρ).
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape(format!(
            "fidelity: dims {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(fidelity_raw(rho.matrix(), sigma.matrix()))
}

/// Fidelity of two PSD matrices given as raw matrices. Eigenvalue dust of
/// the inner product is clipped relative to its largest eigenvalue before
/// the square root, which would otherwise amplify ε-sized dust to √ε.
pub(crate) fn fidelity_raw(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let sr = sqrt_psd(rho);
    let inner = &sr * sigma * &sr;
    let (vals, _) = hermitian_eigen(&inner);
    let lmax = vals.iter().cloned().fold(0.0f64, f64::max);
    let cut = lmax * 1e-13;
    vals.iter().map(|&l| if l > cut { l.sqrt() } else { 0.0 }).sum::<f64>().min(1.0)
}
