//! Hermitian eigendecomposition and exact time evolution `e^{-iHΔt}` (ℏ = 1).
//!
//! One decomposition is cached per Hamiltonian; propagators for any number of
//! time steps are rebuilt from it.

use nalgebra::{DVector, SymmetricEigen};

use crate::error::{invalid, Result};
use crate::linalg::{hermiticity_error, matmul_adj, CMatrix, CVector, C64};
use crate::spin_hilbert::StateVector;

const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Spectral {
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
}

impl Spectral {
    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Unitary whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V Λ V†`
    pub fn reconstruct(&self) -> CMatrix {
        self.weighted(|lambda| C64::from(lambda))
    }

    /// `U(dt) = V diag(e^{-iλ dt}) V†`
    pub fn propagator(&self, dt: f64) -> CMatrix {
        self.weighted(|lambda| C64::from_polar(1.0, -lambda * dt))
    }

    /// `e^{-iHt} ψ` without forming the full propagator.
    pub fn evolve_state(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return invalid(format!("state dimension {} vs operator {}", psi.dim(), self.dim()));
        }
        let mut coeffs = self.eigenvectors.ad_mul(psi.amplitudes());
        for (c, &lambda) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= C64::from_polar(1.0, -lambda * t);
        }
        StateVector::from_amplitudes(&self.eigenvectors * coeffs)
    }

    fn weighted(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (mut col, &lambda) in scaled.column_iter_mut().zip(self.eigenvalues.iter()) {
            col *= f(lambda);
        }
        matmul_adj(&scaled, &self.eigenvectors)
    }
}

pub fn hermitian_eig(h: &CMatrix) -> Result<Spectral> {
    if !h.is_square() || h.nrows() == 0 {
        return invalid(format!("expected a nonempty square matrix, got {:?}", h.shape()));
    }
    let err = hermiticity_error(h);
    if err > HERMITIAN_TOLERANCE {
        return invalid(format!("matrix is not Hermitian (max |A - A†| = {err:.3e})"));
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = CMatrix::from_columns(
        &order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<CVector>>(),
    );
    Ok(Spectral { eigenvalues, eigenvectors })
}

pub fn propagator(s: &Spectral, dt: f64) -> CMatrix {
    s.propagator(dt)
}

pub fn evolve(u: &CMatrix, psi: &StateVector) -> Result<StateVector> {
    if u.ncols() != psi.dim() || u.nrows() != psi.dim() {
        return invalid(format!("operator {:?} cannot act on a state of dimension {}", u.shape(), psi.dim()));
    }
    StateVector::from_amplitudes(u * psi.amplitudes())
}
