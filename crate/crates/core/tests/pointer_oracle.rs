//! Protocol statistics recomputed by coupling the system to an explicit pointer
//! qubit, `U = exp(-i eps D_j (x) sigma)`, pointer in `|0>`, read out in the
//! `|+>, |->` basis. `sigma = sigma_y` gives the X-type measurement and
//! `sigma = sigma_x` the Y-type one.

use kdcontext_core::linalg::{c, outer, random_density, random_unitary, CMatrix, CVector};
use kdcontext_core::rng::stream;
use kdcontext_core::{exact_distributions, BasisPair, DensityMatrix};
use rand::Rng;

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Taylor series; the arguments here have norm below 2.
fn expm(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for i in 1..60 {
        term = &term * m * c(1.0 / i as f64, 0.0);
        sum += &term;
    }
    sum
}

fn pointer_stats(rho: &CMatrix, basis: &BasisPair, j: usize, k: usize, eps: f64, sigma: &CMatrix) -> [[f64; 2]; 2] {
    let d = rho.nrows();
    let dj = basis.a_projector(j) * c(2.0, 0.0) - CMatrix::identity(d, d);
    let u = expm(&(kron(&dj, sigma) * c(0.0, -eps)));
    let zero = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
    let joint = &u * kron(rho, &outer(&zero, &zero)) * u.adjoint();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let readout = [CVector::from_vec(vec![c(h, 0.0), c(h, 0.0)]), CVector::from_vec(vec![c(h, 0.0), c(-h, 0.0)])];
    let pb = [basis.b_projector(k), CMatrix::identity(d, d) - basis.b_projector(k)];
    let mut out = [[0.0; 2]; 2];
    for (x, r) in readout.iter().enumerate() {
        for (z, p) in pb.iter().enumerate() {
            out[x][z] = (kron(p, &outer(r, r)) * &joint).trace().re;
        }
    }
    out
}

#[test]
fn weak_protocols_match_pointer_coupling() {
    let sigma_y = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let sigma_x = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let mut rng = stream(17);
    for d in [2, 3] {
        for _ in 0..20 {
            let basis = BasisPair::from_unitaries(&random_unitary(d, &mut rng), &random_unitary(d, &mut rng)).unwrap();
            let rho = random_density(d, rng.random_range(1..=d), &mut rng);
            let (j, k) = (rng.random_range(0..d), rng.random_range(0..d));
            let eps = 1.5 * rng.random::<f64>() + 0.01;
            let f = exact_distributions(&DensityMatrix::new(rho.clone()).unwrap(), &basis, j, k, eps).unwrap();
            let f2 = pointer_stats(&rho, &basis, j, k, eps, &sigma_y);
            let f3 = pointer_stats(&rho, &basis, j, k, eps, &sigma_x);
            for x in 0..2 {
                for z in 0..2 {
                    assert!((f.f2[x][z] - f2[x][z]).abs() < 1e-12, "f2 {x}{z}: {} vs {}", f.f2[x][z], f2[x][z]);
                    assert!((f.f3[x][z] - f3[x][z]).abs() < 1e-12, "f3 {x}{z}: {} vs {}", f.f3[x][z], f3[x][z]);
                }
            }
        }
    }
}

#[test]
fn classical_protocols_match_direct_formulas() {
    let mut rng = stream(23);
    for d in [2, 3, 4] {
        let basis = BasisPair::from_unitaries(&random_unitary(d, &mut rng), &random_unitary(d, &mut rng)).unwrap();
        let rho = random_density(d, d, &mut rng);
        let eps: f64 = 0.37;
        let (pm, pd) = ((2.0 * eps).sin(), eps.sin().powi(2));
        for j in 0..d {
            for k in 0..d {
                let f = exact_distributions(&DensityMatrix::new(rho.clone()).unwrap(), &basis, j, k, eps).unwrap();
                let pb = basis.b_projector(k);
                let pa = basis.a_projector(j);
                let born = |m: &CMatrix| (&pb * m).trace().re;
                assert!((f.f1[0] - born(&rho)).abs() < 1e-12);
                let a = (&pa * &rho).trace().re;
                assert!((f.f4[0] - ((1.0 - pm) / 2.0 + pm * a)).abs() < 1e-12);
                assert_eq!(f.f5, [0.5, 0.5]);
                let dj = &pa * c(2.0, 0.0) - CMatrix::identity(d, d);
                let dephased = &rho * c(1.0 - pd, 0.0) + &dj * &rho * &dj * c(pd, 0.0);
                assert!((f.f6[0] - born(&dephased)).abs() < 1e-12);
            }
        }
    }
}
