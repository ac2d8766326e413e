use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use kdcontext_core::certify::STRICT_MARGIN;
use kdcontext_core::geometry::{
    check_decomposition, find_witness, hull_membership, random_decomposition, PurePositiveSet, DEFAULT_GAP_TOL, DEFAULT_HULL_TOL,
};
use kdcontext_core::hvm::epsilon_limit;
use kdcontext_core::linalg::{c, expectation, outer, random_density, random_unitary, CMatrix};
use kdcontext_core::protocols::{estimate_kd_from_frequencies, Frequencies, Setting};
use kdcontext_core::rng::{stream, StreamRng};
use kdcontext_core::*;
use proptest::prelude::*;
use rand::Rng;

fn basis(d: usize, rng: &mut StreamRng) -> BasisPair {
    BasisPair::from_unitaries(&random_unitary(d, rng), &random_unitary(d, rng)).unwrap()
}

fn state(d: usize, rng: &mut StreamRng) -> DensityMatrix {
    let rank = rng.random_range(1..=d);
    DensityMatrix::new(random_density(d, rank, rng)).unwrap()
}

fn positive_mixture(basis: &BasisPair, rng: &mut StreamRng) -> DensityMatrix {
    let d = basis.dim();
    let w: Vec<f64> = (0..2 * d).map(|_| rng.random::<f64>()).collect();
    let total: f64 = w.iter().sum();
    let mut m = CMatrix::zeros(d, d);
    for (i, wi) in w.iter().enumerate() {
        let v = if i < d { basis.a(i) } else { basis.b(i - d) };
        m += outer(v, v) * c(wi / total, 0.0);
    }
    DensityMatrix::new(m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn routes_agree_and_marginals_hold(seed in any::<u64>(), d in 2usize..5, eps in 0.001f64..FRAC_PI_2) {
        let mut rng = stream(seed);
        let b = basis(d, &mut rng);
        let rho = state(d, &mut rng);
        let (j, k) = (rng.random_range(0..d), rng.random_range(0..d));
        let f = exact_distributions(&rho, &b, j, k, eps).unwrap();
        prop_assert!(f.route_deviation <= 1e-12);
        prop_assert!(marginalization_check(&f).max_deviation <= 1e-12);
        for p in Protocol::ALL {
            let law = f.law(p);
            prop_assert!((law.total() - 1.0).abs() <= 1e-12);
            prop_assert!(law.entries.iter().all(|(_, x)| *x >= -1e-12));
        }
    }

    #[test]
    fn kd_marginals_are_born_probabilities(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = stream(seed);
        let b = basis(d, &mut rng);
        let rho = state(d, &mut rng);
        let q = kd_distribution(&rho, &b).unwrap();
        prop_assert!((q.total() - c(1.0, 0.0)).norm() <= 1e-12);
        for j in 0..d {
            prop_assert!((q.a_marginal(j) - rho.expectation(&b.a_projector(j))).abs() <= 1e-12);
            prop_assert!((q.b_marginal(j) - rho.expectation(&b.b_projector(j))).abs() <= 1e-12);
        }
        prop_assert!(q.nonpositivity() >= 0.0);
    }

    #[test]
    fn nonpositivity_is_convex(seed in any::<u64>(), d in 2usize..4, p in 0.0f64..1.0) {
        let mut rng = stream(seed);
        let b = basis(d, &mut rng);
        let (r1, r2) = (state(d, &mut rng), state(d, &mut rng));
        let mix = DensityMatrix::mixture(&[(p, &r1), (1.0 - p, &r2)]).unwrap();
        let n = |r: &DensityMatrix| kd_distribution(r, &b).unwrap().nonpositivity();
        prop_assert!(n(&mix) <= p * n(&r1) + (1.0 - p) * n(&r2) + 1e-12);
    }

    #[test]
    fn basis_states_are_kd_positive(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = stream(seed);
        let b = basis(d, &mut rng);
        for i in 0..d {
            for v in [b.a(i), b.b(i)] {
                let rho = DensityMatrix::new(outer(v, v)).unwrap();
                prop_assert!(kd_distribution(&rho, &b).unwrap().nonpositivity() <= 1e-12);
            }
        }
    }

    #[test]
    fn estimator_inverts_exact_frequencies(seed in any::<u64>(), d in 2usize..4, eps in 0.01f64..1.5) {
        let mut rng = stream(seed);
        let b = basis(d, &mut rng);
        let rho = state(d, &mut rng);
        let q = kd_distribution(&rho, &b).unwrap();
        let est = estimate_kd_from_frequencies(&Frequencies::exact(&rho, &b, eps).unwrap(), eps).unwrap();
        prop_assert!(kdcontext_core::linalg::max_abs_diff(&est, q.matrix()) <= 1e-10);
    }

    #[test]
    fn kd_positive_states_have_models(seed in any::<u64>(), d in 2usize..4, frac in 0.01f64..0.99) {
        let mut rng = stream(seed);
        let b = if d == 2 { BasisPair::qubit_mub() } else { basis(d, &mut rng) };
        let rho = positive_mixture(&b, &mut rng);
        let eps = frac * epsilon_limit();
        let model = build_hvm(&rho, &b, eps).unwrap();
        prop_assert!(model.min_entry() >= -1e-12);
        prop_assert!(verify_correctness(&model, &rho, &b, eps).unwrap().passed);
        prop_assert!(verify_noncontextuality(&model).passed);
        for setting in Setting::grid(d) {
            let predicted = hvm_predict(&model, setting.protocol, setting.j, setting.k).unwrap();
            let exact = exact_distributions(&rho, &b, setting.j, setting.k, eps).unwrap().law(setting.protocol);
            prop_assert!(predicted.max_abs_diff(&exact) <= 1e-10);
        }
    }

    #[test]
    fn kd_positive_states_respect_the_caps(seed in any::<u64>(), d in 2usize..4, eps in 0.001f64..FRAC_PI_4) {
        let mut rng = stream(seed);
        let b = basis(d, &mut rng);
        let rho = positive_mixture(&b, &mut rng);
        for j in 0..d {
            for k in 0..d {
                prop_assert!(hvm_cap_violation(&rho, &b, j, k, eps).unwrap().max() <= 1e-12);
            }
        }
    }

    #[test]
    fn verdicts_are_consistent(seed in any::<u64>(), d in 2usize..4, eps in 0.001f64..FRAC_PI_2) {
        let mut rng = stream(seed);
        let b = basis(d, &mut rng);
        let rho = if rng.random::<bool>() { state(d, &mut rng) } else { positive_mixture(&b, &mut rng) };
        let v = certify(&rho, &b, eps).unwrap();
        let threshold = 3.0 * (d * d) as f64 * eps;
        match v.verdict {
            Verdict::Contextual => prop_assert!(eps <= FRAC_PI_4 && v.nonpositivity.min(FRAC_PI_4) - threshold > STRICT_MARGIN),
            Verdict::NoncontextualModelExists => prop_assert!(v.nonpositivity <= 1e-10 && eps < epsilon_limit()),
            Verdict::Indeterminate => {}
        }
        // a negative real part -r adds at least 2r to N
        prop_assert!(v.lemma.real.iter().flatten().all(|&r| 2.0 * r <= v.nonpositivity + 1e-12));
    }

    #[test]
    fn contextuality_persists_at_weaker_coupling(seed in any::<u64>(), eps in 0.001f64..0.05, shrink in 0.0f64..1.0) {
        let mut rng = stream(seed);
        let b = basis(2, &mut rng);
        let rho = state(2, &mut rng);
        if certify(&rho, &b, eps).unwrap().verdict == Verdict::Contextual {
            let weaker = eps * (0.01 + 0.99 * shrink);
            prop_assert_eq!(certify(&rho, &b, weaker).unwrap().verdict, Verdict::Contextual);
        }
    }

    #[test]
    fn witnesses_separate_and_decompositions_meet_them(seed in any::<u64>(), d in 2usize..4, parts in 1usize..6) {
        let mut rng = stream(seed);
        let b = if d == 2 { BasisPair::qubit_mub() } else { BasisPair::fourier(3) };
        let gens = PurePositiveSet::basis_states(&b, 1e-9).vectors();
        let rho = random_density(d, d, &mut rng);
        let hull = hull_membership(&rho, &gens, DEFAULT_HULL_TOL).unwrap();
        prop_assume!(!hull.feasible);
        let w = find_witness(&rho, &gens, DEFAULT_GAP_TOL).unwrap();
        prop_assert!((w.h.norm() - 1.0).abs() <= 1e-9);
        prop_assert!(w.recheck(&rho, &gens) <= 1e-9);
        prop_assert!((w.gap - hull.distance).abs() <= 1e-7);
        prop_assert!(gens.iter().all(|g| expectation(&w.h, g) <= w.c_hull + 1e-10));
        let dec = random_decomposition(&rho, parts, &mut rng);
        let r = check_decomposition(&rho, &b, &dec, 0.0, Some(&w)).unwrap();
        prop_assert!(r.any_in_witness_set());
    }
}
