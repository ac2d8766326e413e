use alloc::vec::Vec;

use crate::basis::BasisPair;
use crate::kd::pure_nonpositivity;
use crate::linalg::{c, normalize, phase_distance, random_unit_vector, CMatrix, CVector};
use crate::optim::NelderMead;
use crate::rng::{cell_stream, domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Provenance {
    BasisA(usize),
    BasisB(usize),
    /// Found by the numerical search in this restart.
    Search(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveState {
    pub vector: CVector,
    pub provenance: Provenance,
    /// `N` re-evaluated on the stored vector.
    pub nonpositivity: f64,
}

/// Pure states with `N <= tol`, always starting with the `2d` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct PurePositiveSet {
    pub basis: BasisPair,
    pub tol: f64,
    pub states: Vec<PositiveState>,
}

impl PurePositiveSet {
    /// Just the eigenvectors of `A` and `B`.
    pub fn basis_states(basis: &BasisPair, tol: f64) -> Self {
        let d = basis.dim();
        let mut states = Vec::with_capacity(2 * d);
        for j in 0..d {
            states.push(PositiveState { vector: basis.a(j).clone(), provenance: Provenance::BasisA(j), nonpositivity: pure_nonpositivity(basis.a(j), basis) });
        }
        for k in 0..d {
            states.push(PositiveState { vector: basis.b(k).clone(), provenance: Provenance::BasisB(k), nonpositivity: pure_nonpositivity(basis.b(k), basis) });
        }
        Self { basis: basis.clone(), tol, states }
    }

    pub fn vectors(&self) -> Vec<CVector> {
        self.states.iter().map(|s| s.vector.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Adds `psi` unless it is within `dedup_tol` of a member up to phase.
    pub fn insert(&mut self, psi: CVector, provenance: Provenance, dedup_tol: f64) -> bool {
        if self.states.iter().any(|s| phase_distance(&s.vector, &psi) <= dedup_tol) {
            return false;
        }
        let nonpositivity = pure_nonpositivity(&psi, &self.basis);
        self.states.push(PositiveState { vector: psi, provenance, nonpositivity });
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Number of random restarts.
    pub budget: usize,
    /// Acceptance bound on `N`.
    pub tol: f64,
    pub dedup_tol: f64,
    /// Amplitudes below these are treated as zero when polishing.
    pub support_cuts: [f64; 3],
    pub nelder_mead: NelderMead,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: 32,
            tol: 1e-9,
            dedup_tol: 1e-6,
            support_cuts: [1e-2, 1e-3, 1e-4],
            nelder_mead: NelderMead { max_evals: 6000, ..NelderMead::default() },
        }
    }
}

pub fn pure_positive_search(basis: &BasisPair, budget: usize, tol: f64, seed: u64) -> PurePositiveSet {
    pure_positive_search_with(basis, &SearchConfig { budget, tol, ..SearchConfig::default() }, seed)
}

/// Random restarts of Nelder-Mead on `N(psi)`, each followed by a polish in
/// the subspace orthogonal to the basis vectors the candidate barely touches.
/// KD-positive pure states sit on such zero patterns, and inside the reduced
/// subspace the kinks that stall the simplex are gone.
pub fn pure_positive_search_with(basis: &BasisPair, config: &SearchConfig, seed: u64) -> PurePositiveSet {
    let mut set = PurePositiveSet::basis_states(basis, config.tol);
    for restart in 0..config.budget {
        let mut rng = cell_stream(seed, domain::SEARCH_RESTART, restart as u64);
        let start = random_unit_vector(basis.dim(), &mut rng);
        let Some(psi) = minimize_in_span(basis, &CMatrix::identity(basis.dim(), basis.dim()), &start, &config.nelder_mead) else {
            continue;
        };
        let mut best = (pure_nonpositivity(&psi, basis), psi.clone());
        for &cut in &config.support_cuts {
            if let Some(polished) = polish(basis, &psi, cut, &config.nelder_mead) {
                let n = pure_nonpositivity(&polished, basis);
                if n < best.0 {
                    best = (n, polished);
                }
            }
        }
        if best.0 <= config.tol {
            set.insert(best.1, Provenance::Search(restart), config.dedup_tol);
        }
    }
    set
}

/// Minimizes `N(normalize(W z))` over `z`, where the columns of `w` are an
/// orthonormal basis of the search subspace.
fn minimize_in_span(basis: &BasisPair, w: &CMatrix, start: &CVector, nm: &NelderMead) -> Option<CVector> {
    let m = w.ncols();
    let z0 = w.adjoint() * start;
    let to_vec = |x: &[f64]| normalize(&(w * CVector::from_fn(m, |i, _| c(x[2 * i], x[2 * i + 1]))));
    let objective = |x: &[f64]| to_vec(x).map_or(f64::INFINITY, |psi| pure_nonpositivity(&psi, basis));
    let x0: Vec<f64> = z0.iter().flat_map(|z| [z.re, z.im]).collect();
    let found = nm.minimize_restarted(objective, &x0, 4);
    to_vec(&found.x)
}

fn polish(basis: &BasisPair, psi: &CVector, cut: f64, nm: &NelderMead) -> Option<CVector> {
    let d = basis.dim();
    let mut avoid: Vec<CVector> = Vec::new();
    for j in 0..d {
        if basis.a(j).dotc(psi).norm() < cut {
            avoid.push(basis.a(j).clone());
        }
    }
    for k in 0..d {
        if basis.b(k).dotc(psi).norm() < cut {
            avoid.push(basis.b(k).clone());
        }
    }
    if avoid.is_empty() {
        return None;
    }
    let w = orthogonal_complement(d, &avoid)?;
    let start = normalize(&(&w * (w.adjoint() * psi)))?;
    if w.ncols() == 1 {
        return Some(start);
    }
    minimize_in_span(basis, &w, &start, nm)
}

/// Orthonormal basis of the complement of `span(vs)`, or `None` if it is trivial.
fn orthogonal_complement(d: usize, vs: &[CVector]) -> Option<CMatrix> {
    let mut p = CMatrix::identity(d, d);
    let span = CMatrix::from_columns(vs);
    let svd = span.svd(true, false);
    let u = svd.u?;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > 1e-8 {
            let col = u.column(i).into_owned();
            p -= &col * col.adjoint();
        }
    }
    let (values, vectors) = crate::linalg::eigh(&p);
    let keep: Vec<usize> = (0..d).filter(|&i| values[i] > 0.5).collect();
    if keep.is_empty() {
        return None;
    }
    Some(CMatrix::from_columns(&keep.iter().map(|&i| vectors.column(i).into_owned()).collect::<Vec<_>>()))
}
