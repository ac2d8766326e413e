use alloc::vec::Vec;

use rand::Rng;

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::geometry::SeparatingWitness;
use crate::kd::pure_nonpositivity;
use crate::linalg::{c, eigh, expectation, outer, random_unitary, CMatrix, CVector};

/// Tolerance on weights and on the reproduced mixture.
pub const DECOMPOSITION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecompositionReport {
    pub nonpositivities: Vec<f64>,
    pub max_nonpositivity: f64,
    /// Index of the component with the largest `N`.
    pub argmax: usize,
    /// `max_i N(psi_i) > delta`
    pub exceeds_delta: bool,
    /// Per component, `Tr(H psi_i) >= c_star` up to `1e-10`; empty without a witness.
    pub in_witness_set: Vec<bool>,
    /// Frobenius norm of `sum_i p_i psi_i - rho*`.
    pub residual: f64,
}

impl DecompositionReport {
    pub fn any_in_witness_set(&self) -> bool {
        self.in_witness_set.iter().any(|&b| b)
    }
}

/// Checks a pure decomposition `rho* = sum_i p_i |psi_i><psi_i|` and reports
/// its most KD-nonpositive component. Vectors are normalized before use.
pub fn check_decomposition(
    rho_star: &CMatrix,
    basis: &BasisPair,
    decomposition: &[(f64, CVector)],
    delta: f64,
    witness: Option<&SeparatingWitness>,
) -> Result<DecompositionReport> {
    if decomposition.is_empty() {
        return Err(Error::NotADecomposition(1.0));
    }
    let d = rho_star.nrows();
    let total: f64 = decomposition.iter().map(|(p, _)| p).sum();
    let most_negative = decomposition.iter().map(|(p, _)| *p).fold(0.0, f64::min);
    let weight_error = (total - 1.0).abs().max(-most_negative);
    if weight_error > DECOMPOSITION_TOL {
        return Err(Error::NotADecomposition(weight_error));
    }
    let mut mix = CMatrix::zeros(d, d);
    let mut states = Vec::with_capacity(decomposition.len());
    for (p, v) in decomposition {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: v.len() });
        }
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        let psi = v / c(n, 0.0);
        mix += outer(&psi, &psi) * c(*p, 0.0);
        states.push(psi);
    }
    let residual = (&mix - rho_star).norm();
    if residual > DECOMPOSITION_TOL {
        return Err(Error::NotADecomposition(residual));
    }
    let nonpositivities: Vec<f64> = states.iter().map(|psi| pure_nonpositivity(psi, basis)).collect();
    let (argmax, max_nonpositivity) = nonpositivities
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let in_witness_set = match witness {
        Some(w) => states.iter().map(|psi| expectation(&w.h, psi) >= w.c_star - crate::COMPOSED_TOL).collect(),
        None => Vec::new(),
    };
    Ok(DecompositionReport {
        nonpositivities,
        max_nonpositivity,
        argmax,
        exceeds_delta: max_nonpositivity > delta,
        in_witness_set,
        residual,
    })
}

/// A random pure decomposition of `rho` into `components` states.
///
/// With `rho = sum_i l_i |e_i><e_i|` and `U` Haar on `C^m`, the vectors
/// `u_a = sum_i U_{a,i} sqrt(l_i) e_i` satisfy `sum_a |u_a><u_a| = rho`.
/// `components` is raised to the rank of `rho` if smaller.
pub fn random_decomposition<R: Rng + ?Sized>(rho: &CMatrix, components: usize, rng: &mut R) -> Vec<(f64, CVector)> {
    let d = rho.nrows();
    let (values, vectors) = eigh(rho);
    let support: Vec<usize> = (0..d).filter(|&i| values[i] > 1e-14).collect();
    let m = components.max(support.len());
    let u = random_unitary(m, rng);
    let mut out = Vec::with_capacity(m);
    for a in 0..m {
        let mut v = CVector::zeros(d);
        for (col, &i) in support.iter().enumerate() {
            v += vectors.column(i) * (u[(a, col)] * c(values[i].sqrt(), 0.0));
        }
        let p = v.norm_squared();
        if p > 1e-300 {
            out.push((p, v / c(p.sqrt(), 0.0)));
        }
    }
    out
}
