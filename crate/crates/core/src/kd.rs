//! Kirkwood-Dirac distributions, nonpositivity, weak values and state
//! reconstruction.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::linalg::{self, c, outer, CMatrix, CVector, ZERO};
use crate::protocols::Sign;
use crate::state::DensityMatrix;

/// Denominator below which a weak value is flagged undefined.
pub const WEAK_VALUE_FLOOR: f64 = 1e-12;
/// Default floor on `|<b_k|a_j>|` for reconstruction.
pub const DEFAULT_OVERLAP_FLOOR: f64 = 1e-8;

/// `Q_{j,k}(rho) = Tr(Pi^B_k Pi^A_j rho)` together with its derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct KdDistribution {
    q: CMatrix,
    a_marginals: Vec<f64>,
    b_marginals: Vec<f64>,
    nonpositivity: f64,
    weak: WeakValues,
}

impl KdDistribution {
    /// Wraps a `d x d` quasiprobability matrix (rows `j`, columns `k`), e.g. an
    /// estimate, and derives marginals, nonpositivity and weak values.
    pub fn from_matrix(q: CMatrix) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::DimensionMismatch { expected: q.nrows(), found: q.ncols() });
        }
        if q.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        let d = q.nrows();
        let a_marginals = (0..d).map(|j| q.row(j).iter().map(|z| z.re).sum()).collect();
        let b_marginals: Vec<f64> = (0..d).map(|k| q.column(k).iter().map(|z| z.re).sum()).collect();
        let nonpositivity = nonpositivity_of(&q);
        let weak = WeakValues::from_q(&q, &b_marginals);
        Ok(Self { q, a_marginals, b_marginals, nonpositivity, weak })
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.q[(j, k)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.q
    }

    /// `Tr(Pi^A_j rho) = sum_k Q_{j,k}`
    pub fn a_marginal(&self, j: usize) -> f64 {
        self.a_marginals[j]
    }

    /// `Tr(Pi^B_k rho) = sum_j Q_{j,k}`
    pub fn b_marginal(&self, k: usize) -> f64 {
        self.b_marginals[k]
    }

    pub fn total(&self) -> Complex64 {
        self.q.iter().fold(ZERO, |acc, z| acc + z)
    }

    pub fn nonpositivity(&self) -> f64 {
        self.nonpositivity
    }

    pub fn weak_values(&self) -> &WeakValues {
        &self.weak
    }

    /// All entries real and nonnegative within `tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.q.iter().all(|z| z.re >= -tol && z.im.abs() <= tol)
    }
}

/// `w_{j,k} = Q_{j,k} / Tr(Pi^B_k rho)` and the conditional weak values
/// `w^z_{j,k}` used by the `z = -1` branch of the protocol statistics.
///
/// Entries whose denominator is at most [`WEAK_VALUE_FLOOR`] are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakValues {
    d: usize,
    plus: Vec<Option<Complex64>>,
    minus: Vec<Option<Complex64>>,
}

impl WeakValues {
    fn from_q(q: &CMatrix, b_marginals: &[f64]) -> Self {
        let d = q.nrows();
        let mut plus = Vec::with_capacity(d * d);
        let mut minus = Vec::with_capacity(d * d);
        for j in 0..d {
            let row_total = q.row(j).iter().fold(ZERO, |acc, z| acc + z);
            for k in 0..d {
                let p = b_marginals[k];
                plus.push((p > WEAK_VALUE_FLOOR).then(|| q[(j, k)] / c(p, 0.0)));
                // sum_{m != k} w_{j,m} p^m = sum_{m != k} Q_{j,m}
                let rest: f64 = b_marginals.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, p)| p).sum();
                minus.push((rest > WEAK_VALUE_FLOOR).then(|| (row_total - q[(j, k)]) / c(rest, 0.0)));
            }
        }
        Self { d, plus, minus }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `w_{j,k}`
    pub fn get(&self, j: usize, k: usize) -> Option<Complex64> {
        self.plus[j * self.d + k]
    }

    /// `w^z_{j,k}`
    pub fn conditional(&self, j: usize, k: usize, z: Sign) -> Option<Complex64> {
        match z {
            Sign::Plus => self.plus[j * self.d + k],
            Sign::Minus => self.minus[j * self.d + k],
        }
    }
}

/// Computes `Q_{j,k}(rho) = <a_j|rho|b_k><b_k|a_j>`.
pub fn kd_distribution(rho: &DensityMatrix, basis: &BasisPair) -> Result<KdDistribution> {
    let d = basis.dim();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
    }
    let m = rho.matrix();
    let rho_b: Vec<_> = (0..d).map(|k| m * basis.b(k)).collect();
    let q = CMatrix::from_fn(d, d, |j, k| basis.a(j).dotc(&rho_b[k]) * basis.overlap(j, k));
    KdDistribution::from_matrix(q)
}

/// `N = -1 + sum_{j,k} |Q_{j,k}|`, with round-off in `[-1e-12, 0]` clamped to 0.
pub fn nonpositivity(q: &KdDistribution) -> f64 {
    q.nonpositivity()
}

fn nonpositivity_of(q: &CMatrix) -> f64 {
    let n = q.iter().map(|z| z.norm()).sum::<f64>() - 1.0;
    if (-crate::ALGEBRAIC_TOL..0.0).contains(&n) {
        0.0
    } else {
        n
    }
}

/// `N(|psi><psi|)` from amplitudes alone: `|Q_{j,k}| = |<a_j|psi>| |<psi|b_k>| |<b_k|a_j>|`.
/// Assumes `psi` is normalized.
pub fn pure_nonpositivity(psi: &CVector, basis: &BasisPair) -> f64 {
    let d = basis.dim();
    let a: Vec<f64> = (0..d).map(|j| basis.a(j).dotc(psi).norm()).collect();
    let b: Vec<f64> = (0..d).map(|k| basis.b(k).dotc(psi).norm()).collect();
    let mut total = 0.0;
    for j in 0..d {
        for k in 0..d {
            total += a[j] * b[k] * basis.overlap(j, k).norm();
        }
    }
    let n = total - 1.0;
    if (-crate::ALGEBRAIC_TOL..0.0).contains(&n) {
        0.0
    } else {
        n
    }
}

pub fn weak_values(q: &KdDistribution) -> &WeakValues {
    q.weak_values()
}

/// Inverts the KD map with the default overlap floor.
pub fn reconstruct_state(q: &KdDistribution, basis: &BasisPair) -> Result<DensityMatrix> {
    DensityMatrix::new(reconstruct_matrix(q, basis, DEFAULT_OVERLAP_FLOOR)?)
}

/// `rho = sum_{j,k} Q_{j,k} |a_j><b_k| / <b_k|a_j>`, Hermitized.
///
/// The result is not checked for positivity, so this also serves estimated
/// distributions that need a PSD projection afterwards.
pub fn reconstruct_matrix(q: &KdDistribution, basis: &BasisPair, overlap_floor: f64) -> Result<CMatrix> {
    let d = basis.dim();
    if q.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: q.dim() });
    }
    let mut rho = CMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let overlap = basis.overlap(j, k);
            if overlap.norm() <= overlap_floor {
                return Err(Error::IllConditionedOverlap { j, k, overlap: overlap.norm() });
            }
            rho += outer(basis.a(j), basis.b(k)) * (q.get(j, k) / overlap);
        }
    }
    Ok(linalg::hermitize(&rho))
}
