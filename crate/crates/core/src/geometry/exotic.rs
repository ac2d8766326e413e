use crate::error::{Error, Result};
use crate::geometry::{
    find_witness, hull_membership, negativity_floor, FloorConfig, HullMembership, NegativityFloor, PurePositiveSet, SeparatingWitness,
    DEFAULT_GAP_TOL, DEFAULT_HULL_TOL,
};
use crate::kd::kd_distribution;
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExoticConfig {
    /// Bound on `N(rho*)` for KD-positivity.
    pub kd_tol: f64,
    pub hull_tol: f64,
    pub gap_tol: f64,
    pub floor: FloorConfig,
}

impl Default for ExoticConfig {
    fn default() -> Self {
        Self { kd_tol: 1e-9, hull_tol: DEFAULT_HULL_TOL, gap_tol: DEFAULT_GAP_TOL, floor: FloorConfig::default() }
    }
}

/// Whether a candidate is KD-positive yet outside the hull of the discovered
/// pure KD-positive states.
///
/// Hull membership and the witness are relative to `set`. A search that missed
/// generators can make an ordinary state look exotic, so a positive label is
/// only as good as the generator search behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExoticAnalysis {
    pub nonpositivity: f64,
    pub kd_positive: bool,
    pub hull: HullMembership,
    pub witness: Option<SeparatingWitness>,
    pub floor: Option<NegativityFloor>,
    pub exotic: bool,
}

/// The witness and floor are computed whenever the candidate is outside the
/// hull, KD-positive or not.
pub fn analyze_candidate(rho_star: &DensityMatrix, set: &PurePositiveSet, config: &ExoticConfig, seed: u64) -> Result<ExoticAnalysis> {
    let nonpositivity = kd_distribution(rho_star, &set.basis)?.nonpositivity();
    let kd_positive = nonpositivity <= config.kd_tol;
    let generators = set.vectors();
    let hull = hull_membership(rho_star.matrix(), &generators, config.hull_tol)?;
    let (witness, floor) = if hull.feasible {
        (None, None)
    } else {
        match find_witness(rho_star.matrix(), &generators, config.gap_tol) {
            Ok(w) => {
                let f = negativity_floor(&w, &set.basis, &config.floor, seed)?;
                (Some(w), Some(f))
            }
            Err(Error::NoSeparation { .. }) => (None, None),
            Err(e) => return Err(e),
        }
    };
    let exotic = kd_positive && !hull.feasible && witness.as_ref().is_some_and(|w| w.gap > config.gap_tol);
    Ok(ExoticAnalysis { nonpositivity, kd_positive, hull, witness, floor, exotic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisPair;
    use crate::geometry::PurePositiveSet;
    use crate::linalg::c;
    use crate::state::PureState;
    use alloc::vec;

    #[test]
    fn maximally_mixed_is_not_exotic() {
        let basis = BasisPair::qubit_mub();
        let set = PurePositiveSet::basis_states(&basis, 1e-9);
        let a = analyze_candidate(&DensityMatrix::maximally_mixed(2), &set, &ExoticConfig::default(), 0).unwrap();
        assert!(a.kd_positive && a.hull.feasible && !a.exotic);
    }

    #[test]
    fn nonpositive_state_is_separated_but_not_exotic() {
        let basis = BasisPair::qubit_mub();
        let set = PurePositiveSet::basis_states(&basis, 1e-9);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let rho = DensityMatrix::from_pure(&PureState::new(vec![c(s, 0.0), c(0.0, s)]).unwrap());
        let a = analyze_candidate(&rho, &set, &ExoticConfig::default(), 0).unwrap();
        assert!(!a.kd_positive && !a.hull.feasible && a.witness.is_some() && !a.exotic);
    }

    #[test]
    fn incomplete_generators_make_a_state_look_exotic() {
        // With only the A basis as generators, |b_0> is KD-positive and outside.
        let basis = BasisPair::qubit_mub();
        let mut set = PurePositiveSet::basis_states(&basis, 1e-9);
        set.states.truncate(2);
        let rho = DensityMatrix::from_pure(&PureState::from_vector(basis.b(0).clone()).unwrap());
        let a = analyze_candidate(&rho, &set, &ExoticConfig::default(), 0).unwrap();
        assert!(a.exotic);
        assert!(a.floor.unwrap().delta < 1e-6);
    }
}
