//! The pair of observable eigenbases a KD distribution is taken over.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent on some targets and toolchains
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{c, inner, outer, CMatrix, CVector};

/// Orthonormality tolerance for basis vectors.
pub const ORTHONORMAL_TOL: f64 = 1e-12;
/// Minimum Frobenius distance between any `Pi^A_j` and `Pi^B_k`.
pub const SHARED_PROJECTOR_TOL: f64 = 1e-9;

/// Two orthonormal bases `{a_j}` and `{b_k}` of `C^d`, the eigenbases of the
/// nondegenerate observables `A` and `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPair {
    a: Vec<CVector>,
    b: Vec<CVector>,
    /// `overlaps[(k, j)] = <b_k|a_j>`
    overlaps: CMatrix,
}

impl BasisPair {
    pub fn new(a: Vec<CVector>, b: Vec<CVector>) -> Result<Self> {
        let d = a.len();
        if d == 0 {
            return Err(Error::EmptyDimension);
        }
        if b.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: b.len() });
        }
        for v in a.iter().chain(b.iter()) {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
        }
        check_orthonormal(&a, 'A')?;
        check_orthonormal(&b, 'B')?;
        let overlaps = CMatrix::from_fn(d, d, |k, j| inner(&b[k], &a[j]));
        for j in 0..d {
            for k in 0..d {
                // ||Pi^A_j - Pi^B_k||_F^2 = 2 - 2 |<b_k|a_j>|^2
                let dist = (2.0 - 2.0 * overlaps[(k, j)].norm_sqr()).max(0.0).sqrt();
                if dist <= SHARED_PROJECTOR_TOL {
                    return Err(Error::SharedProjector { j, k });
                }
            }
        }
        Ok(Self { a, b, overlaps })
    }

    /// Builds the pair from the columns of two unitaries.
    pub fn from_unitaries(ua: &CMatrix, ub: &CMatrix) -> Result<Self> {
        let cols = |m: &CMatrix| (0..m.ncols()).map(|i| m.column(i).into_owned()).collect();
        Self::new(cols(ua), cols(ub))
    }

    /// Computational basis and the Hadamard (`+`, `-`) basis of a qubit.
    pub fn qubit_mub() -> Self {
        Self::fourier(2)
    }

    /// Computational basis and its discrete Fourier transform, a pair of
    /// mutually unbiased bases in any dimension.
    pub fn fourier(d: usize) -> Self {
        let a = (0..d).map(|j| CVector::from_fn(d, |i, _| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })).collect();
        let norm = 1.0 / (d as f64).sqrt();
        let b = (0..d)
            .map(|k| {
                CVector::from_fn(d, |i, _| {
                    let phase = 2.0 * core::f64::consts::PI * (i * k) as f64 / d as f64;
                    Complex64::from_polar(norm, phase)
                })
            })
            .collect();
        Self::new(a, b).expect("Fourier pair is a valid basis pair")
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self, j: usize) -> &CVector {
        &self.a[j]
    }

    pub fn b(&self, k: usize) -> &CVector {
        &self.b[k]
    }

    pub fn a_vectors(&self) -> &[CVector] {
        &self.a
    }

    pub fn b_vectors(&self) -> &[CVector] {
        &self.b
    }

    /// `<b_k|a_j>`
    pub fn overlap(&self, j: usize, k: usize) -> Complex64 {
        self.overlaps[(k, j)]
    }

    pub fn a_projector(&self, j: usize) -> CMatrix {
        outer(&self.a[j], &self.a[j])
    }

    pub fn b_projector(&self, k: usize) -> CMatrix {
        outer(&self.b[k], &self.b[k])
    }

    /// `D_j = 2 Pi^A_j - I`
    pub fn reflection(&self, j: usize) -> CMatrix {
        self.a_projector(j) * c(2.0, 0.0) - CMatrix::identity(self.dim(), self.dim())
    }

    /// Smallest `|<b_k|a_j>|` over all index pairs.
    pub fn min_overlap(&self) -> f64 {
        self.overlaps.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.dim() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, dim: self.dim() })
        }
    }
}

fn check_orthonormal(vs: &[CVector], which: char) -> Result<()> {
    let mut worst = 0.0f64;
    for (i, u) in vs.iter().enumerate() {
        for (j, v) in vs.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner(u, v) - c(target, 0.0)).norm());
        }
    }
    if worst > ORTHONORMAL_TOL {
        Err(Error::NotOrthonormal { which, deviation: worst })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fourier_pairs_are_unbiased() {
        for d in 2..6 {
            let basis = BasisPair::fourier(d);
            for j in 0..d {
                for k in 0..d {
                    assert!((basis.overlap(j, k).norm_sqr() - 1.0 / d as f64).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn rejects_shared_projector() {
        let e0 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let e1 = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        // Same basis up to a phase on one vector.
        let err = BasisPair::new(vec![e0.clone(), e1.clone()], vec![e1 * c(0.0, 1.0), e0]).unwrap_err();
        assert!(matches!(err, Error::SharedProjector { .. }));
    }

    #[test]
    fn rejects_non_orthonormal() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let e0 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let p = CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]);
        let err = BasisPair::new(vec![e0.clone(), p.clone()], vec![p.clone(), p]).unwrap_err();
        assert!(matches!(err, Error::NotOrthonormal { which: 'A', .. }));
    }

    #[test]
    fn reflection_is_hermitian_unitary() {
        let basis = BasisPair::fourier(3);
        let d = basis.reflection(1);
        let sq = &d * &d;
        assert!(crate::linalg::max_abs_diff(&sq, &CMatrix::identity(3, 3)) < 1e-14);
        assert!(crate::linalg::hermitian_deviation(&d) < 1e-15);
    }
}
