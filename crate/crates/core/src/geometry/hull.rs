use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{c, expectation, frobenius_inner, from_hermitian_coords, hermitian_coords, outer, pure_coords, CMatrix, CVector};
use crate::optim::{min_norm_point, MinNormPoint};

/// Residual (Frobenius) below which a state counts as inside the hull.
pub const DEFAULT_HULL_TOL: f64 = 1e-8;
/// Gap at or below which no separation is claimed.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;
// Wolfe stopping tolerance, relative to the largest squared point norm.
const WOLFE_TOL: f64 = 1e-15;

/// Result of the feasibility problem `rho = sum_i p_i |psi_i><psi_i|`.
///
/// Solved as the minimum-norm point of `conv{psi_i - rho}` in the real
/// coordinates of Hermitian matrices, where Euclidean distance equals the
/// Frobenius distance. `distance` is the solver's value; `residual` is
/// recomputed from the weights and the generator matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct HullMembership {
    pub feasible: bool,
    pub weights: Vec<f64>,
    pub distance: f64,
    pub residual: f64,
    /// The hull point nearest to `rho`.
    pub nearest: CMatrix,
}

fn nearest_point(rho: &CMatrix, generators: &[CVector]) -> Result<(MinNormPoint, CMatrix)> {
    if generators.is_empty() {
        return Err(Error::SetEmpty);
    }
    let d = rho.nrows();
    for g in generators {
        if g.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: g.len() });
        }
    }
    let r = hermitian_coords(rho);
    let points: Vec<Vec<f64>> = generators.iter().map(|g| pure_coords(g).iter().zip(&r).map(|(a, b)| a - b).collect()).collect();
    let mnp = min_norm_point(&points, WOLFE_TOL).ok_or(Error::SetEmpty)?;
    let mut nearest = CMatrix::zeros(d, d);
    for (w, g) in mnp.weights.iter().zip(generators) {
        if *w != 0.0 {
            nearest += outer(g, g) * c(*w, 0.0);
        }
    }
    Ok((mnp, nearest))
}

pub fn hull_membership(rho: &CMatrix, generators: &[CVector], tol: f64) -> Result<HullMembership> {
    let (mnp, nearest) = nearest_point(rho, generators)?;
    let residual = (&nearest - rho).norm();
    Ok(HullMembership { feasible: residual <= tol, weights: mnp.weights, distance: mnp.distance, residual, nearest })
}

/// A traceless Hermitian `H` with `||H||_F = 1` and `Tr(H rho*) > max_i Tr(H psi_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatingWitness {
    pub h: CMatrix,
    /// `max_i Tr(H psi_i)` over the generators.
    pub c_hull: f64,
    /// `Tr(H rho*)`
    pub c_star: f64,
    pub gap: f64,
    /// Generator attaining `c_hull`.
    pub hull_argmax: usize,
}

impl SeparatingWitness {
    /// Largest disagreement between stored and recomputed `c_hull`, `c_star`
    /// and `||H||_F`.
    pub fn recheck(&self, rho_star: &CMatrix, generators: &[CVector]) -> f64 {
        let c_hull = generators.iter().map(|g| expectation(&self.h, g)).fold(f64::NEG_INFINITY, f64::max);
        let c_star = frobenius_inner(&self.h, rho_star).re;
        (c_hull - self.c_hull).abs().max((c_star - self.c_star).abs()).max((self.h.norm() - 1.0).abs())
    }
}

/// `H = (rho* - sigma*) / ||rho* - sigma*||_F` with `sigma*` the nearest hull
/// point. This `H` maximizes `Tr(H rho*) - max_i Tr(H psi_i)` over unit-norm
/// Hermitian matrices, and the optimum equals the distance to the hull.
pub fn find_witness(rho_star: &CMatrix, generators: &[CVector], gap_tol: f64) -> Result<SeparatingWitness> {
    let (mnp, _) = nearest_point(rho_star, generators)?;
    let d = rho_star.nrows();
    if mnp.distance <= gap_tol {
        return Err(Error::NoSeparation { gap: mnp.distance });
    }
    let coords: Vec<f64> = mnp.point.iter().map(|v| -v / mnp.distance).collect();
    let h = from_hermitian_coords(d, &coords);
    let (hull_argmax, c_hull) = generators
        .iter()
        .enumerate()
        .map(|(i, g)| (i, expectation(&h, g)))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let c_star = frobenius_inner(&h, rho_star).re;
    let gap = c_star - c_hull;
    if gap <= gap_tol {
        return Err(Error::NoSeparation { gap });
    }
    Ok(SeparatingWitness { h, c_hull, c_star, gap, hull_argmax })
}
