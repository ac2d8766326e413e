//! Quantum states on `C^d`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, outer, CMatrix, CVector};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGENVALUE_FLOOR: f64 = -1e-10;
pub const NORM_TOL: f64 = 1e-10;

/// A unit vector, representing the pure state `|psi><psi|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(CVector);

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::from_vector(CVector::from_vec(amplitudes))
    }

    pub fn from_vector(v: CVector) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::EmptyDimension);
        }
        let n = v.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self(v))
    }

    /// Normalizes `v`; fails only on the zero vector.
    pub fn normalized(v: CVector) -> Result<Self> {
        let n = v.norm();
        linalg::normalize(&v).map(Self).ok_or(Error::NotNormalized(n))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    pub fn projector(&self) -> CMatrix {
        outer(&self.0, &self.0)
    }
}

/// A Hermitian, positive semidefinite, unit-trace `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let herm = linalg::hermitian_deviation(&m);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = linalg::trace(&m);
        if (tr - c(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = linalg::min_eigenvalue(&m);
        if min < EIGENVALUE_FLOOR {
            return Err(Error::NotPositive(min));
        }
        Ok(Self(m))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self(psi.projector())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(CMatrix::identity(d, d) * c(1.0 / d as f64, 0.0))
    }

    /// Convex combination `sum_i p_i rho_i`; weights must be a probability vector.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyDimension)?;
        let d = first.1.dim();
        let mut m = CMatrix::zeros(d, d);
        for (p, rho) in parts {
            if rho.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
            }
            if *p < 0.0 {
                return Err(Error::InvalidConfig(alloc::format!("negative mixture weight {p}")));
            }
            m += rho.matrix() * c(*p, 0.0);
        }
        Self::new(linalg::hermitize(&m))
    }

    /// Uniform mixture of pure states.
    pub fn uniform_mixture(states: &[PureState]) -> Result<Self> {
        let first = states.first().ok_or(Error::EmptyDimension)?;
        let d = first.dim();
        let mut m = CMatrix::zeros(d, d);
        for psi in states {
            if psi.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: psi.dim() });
            }
            m += psi.projector();
        }
        Self::new(linalg::hermitize(&(m / c(states.len() as f64, 0.0))))
    }

    /// Clips negative eigenvalues and renormalizes; the standard estimator
    /// fix-up for reconstructed states.
    pub fn psd_projection(m: &CMatrix) -> Result<Self> {
        Self::new(linalg::psd_project(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// `Tr(P rho)` for a Hermitian `P`, real part.
    pub fn expectation(&self, p: &CMatrix) -> f64 {
        linalg::trace(&(p * &self.0)).re
    }
}
