use alloc::vec::Vec;

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::geometry::SeparatingWitness;
use crate::kd::pure_nonpositivity;
use crate::linalg::{c, eigh, expectation, normalize, random_unit_vector, CVector};
use crate::optim::NelderMead;
use crate::rng::{cell_stream, domain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorConfig {
    pub restarts: usize,
    /// Weight of the exact `L1` penalty on `max(0, c_star - Tr(H psi))`.
    pub penalty: f64,
    /// Slack allowed on the constraint `Tr(H psi) >= c_star`.
    pub feas_tol: f64,
    pub nelder_mead: NelderMead,
}

impl Default for FloorConfig {
    fn default() -> Self {
        Self { restarts: 16, penalty: 10.0, feas_tol: 1e-9, nelder_mead: NelderMead { max_evals: 6000, ..NelderMead::default() } }
    }
}

/// Smallest `N(psi)` found over pure `psi` with `Tr(H psi) >= c_star`.
///
/// This is a local search, so `delta` is an upper bound on the true minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativityFloor {
    pub delta: f64,
    pub state: CVector,
    /// Restart that produced `delta` (lowest index on ties).
    pub restart: usize,
    /// `N` reached by every restart after repair.
    pub restart_values: Vec<f64>,
    /// Largest eigenvalue of `H`; the constraint set is nonempty iff it is at
    /// least `c_star`.
    pub top_eigenvalue: f64,
}

/// Restart 0 starts from the top eigenvector of `H`, the rest from Haar-random
/// vectors on their own derived streams. Each restart minimizes the penalized
/// objective and then, if the result is still infeasible, bisects along the
/// path toward the (phase-aligned) top eigenvector until it is feasible.
pub fn negativity_floor(witness: &SeparatingWitness, basis: &BasisPair, config: &FloorConfig, seed: u64) -> Result<NegativityFloor> {
    let norm = witness.h.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::DegenerateWitness(norm));
    }
    let d = basis.dim();
    if witness.h.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, found: witness.h.nrows() });
    }
    let (values, vectors) = eigh(&witness.h);
    let top_eigenvalue = values[d - 1];
    let c_star = witness.c_star;
    if top_eigenvalue < c_star - config.feas_tol {
        return Err(Error::EmptyFeasibleSet { threshold: c_star });
    }
    let top = vectors.column(d - 1).into_owned();
    let feasible = |psi: &CVector| expectation(&witness.h, psi) >= c_star - config.feas_tol;

    let mut best: Option<(f64, CVector, usize)> = None;
    let mut restart_values = Vec::with_capacity(config.restarts.max(1));
    for restart in 0..config.restarts.max(1) {
        let start = if restart == 0 { top.clone() } else { random_unit_vector(d, &mut cell_stream(seed, domain::FLOOR_RESTART, restart as u64)) };
        let to_vec = |x: &[f64]| normalize(&CVector::from_fn(d, |i, _| c(x[2 * i], x[2 * i + 1])));
        let objective = |x: &[f64]| match to_vec(x) {
            Some(psi) => pure_nonpositivity(&psi, basis) + config.penalty * (c_star - expectation(&witness.h, &psi)).max(0.0),
            None => f64::INFINITY,
        };
        let x0: Vec<f64> = start.iter().flat_map(|z| [z.re, z.im]).collect();
        let found = config.nelder_mead.minimize_restarted(objective, &x0, 4);
        let psi = to_vec(&found.x).unwrap_or_else(|| top.clone());
        let psi = if feasible(&psi) { psi } else { repair(&psi, &top, |v| feasible(v)) };
        let n = pure_nonpositivity(&psi, basis);
        restart_values.push(n);
        if best.as_ref().is_none_or(|b| n < b.0) {
            best = Some((n, psi, restart));
        }
    }
    let (delta, state, restart) = best.expect("at least one restart");
    Ok(NegativityFloor { delta, state, restart, restart_values, top_eigenvalue })
}

fn repair(psi: &CVector, top: &CVector, feasible: impl Fn(&CVector) -> bool) -> CVector {
    let overlap = top.dotc(psi);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    let target = top * phase;
    let at = |t: f64| normalize(&(psi * c(1.0 - t, 0.0) + &target * c(t, 0.0))).unwrap_or_else(|| target.clone());
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(&at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    at(hi)
}
