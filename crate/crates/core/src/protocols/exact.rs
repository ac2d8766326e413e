use alloc::vec::Vec;

use num_complex::Complex64;

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::kd::kd_distribution;
use crate::linalg::{c, trace, CMatrix};
use crate::protocols::kraus::{kraus_operators, WeakMeasurementConfig};
use crate::protocols::{Outcome, OutcomeLaw, Protocol, Sign};
use crate::state::DensityMatrix;

/// Largest tolerated disagreement between the matrix and closed-form routes.
pub const ROUTE_TOL: f64 = 1e-10;

/// Exact outcome laws of all six protocols for one `(j, k)` pair.
///
/// Tables are indexed by `Sign::index()`: `f2[x][z]`, `f3[y][z]`, and so on.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProtocolDistributions {
    pub j: usize,
    pub k: usize,
    pub config: WeakMeasurementConfig,
    pub f1: [f64; 2],
    pub f2: [[f64; 2]; 2],
    pub f3: [[f64; 2]; 2],
    pub f4: [f64; 2],
    pub f5: [f64; 2],
    pub f6: [f64; 2],
    /// `p^k_z = Tr(Pi^{B,z}_k rho)`
    pub p: [f64; 2],
    /// `q^{j,k}_z = Tr(Pi^{B,z}_k D_j rho D_j)`
    pub q: [f64; 2],
    /// Largest gap between the two computation routes.
    pub route_deviation: f64,
}

impl ProtocolDistributions {
    pub fn law(&self, protocol: Protocol) -> OutcomeLaw {
        let entries = protocol
            .outcomes()
            .into_iter()
            .map(|o| {
                let p = self.probability(protocol, &o);
                (o, p)
            })
            .collect();
        OutcomeLaw { protocol, entries }
    }

    pub fn probability(&self, protocol: Protocol, o: &Outcome) -> f64 {
        let i = |s: Option<Sign>| s.map_or(0, Sign::index);
        match protocol {
            Protocol::MeasureB => self.f1[i(o.z)],
            Protocol::WeakXThenB => self.f2[i(o.x)][i(o.z)],
            Protocol::WeakYThenB => self.f3[i(o.y)][i(o.z)],
            Protocol::NoisyA => self.f4[i(o.x)],
            Protocol::Coin => self.f5[i(o.y)],
            Protocol::DephaseThenB => self.f6[i(o.z)],
        }
    }
}

/// Computes every table by Kraus/projector algebra and by the closed forms in
/// terms of `Q(rho)`, and returns the closed-form values.
pub fn exact_distributions(
    rho: &DensityMatrix,
    basis: &BasisPair,
    j: usize,
    k: usize,
    epsilon: f64,
) -> Result<ProtocolDistributions> {
    basis.check_index(j)?;
    basis.check_index(k)?;
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: rho.dim() });
    }
    let kraus = kraus_operators(basis, j, epsilon)?;
    let cfg = kraus.config;
    let d = basis.dim();
    let id = CMatrix::identity(d, d);
    let m = rho.matrix();
    let pi_b = basis.b_projector(k);
    let pi_a = basis.a_projector(j);
    let b_z = [pi_b.clone(), &id - &pi_b];
    let a_x = [pi_a.clone(), &id - &pi_a];
    let refl = kraus.reflection();
    let dephased = refl * m * refl;
    let tr = |a: &CMatrix, b: &CMatrix| trace(&(a * b)).re;

    // Route (i): operators.
    let mut m2 = [[0.0; 2]; 2];
    let mut m3 = [[0.0; 2]; 2];
    for s in Sign::BOTH {
        let ax = kraus.x(s);
        let ay = kraus.y(s);
        let post_x = ax * m * ax.adjoint();
        let post_y = ay * m * ay.adjoint();
        for z in Sign::BOTH {
            m2[s.index()][z.index()] = tr(&b_z[z.index()], &post_x);
            m3[s.index()][z.index()] = tr(&b_z[z.index()], &post_y);
        }
    }
    let m1 = [tr(&b_z[0], m), tr(&b_z[1], m)];
    let noisy = |x: usize| &a_x[x] * c(cfg.p_m, 0.0) + &id * c((1.0 - cfg.p_m) / 2.0, 0.0);
    let m4 = [tr(&noisy(0), m), tr(&noisy(1), m)];
    let channel = m * c(1.0 - cfg.p_d, 0.0) + &dephased * c(cfg.p_d, 0.0);
    let m6 = [tr(&b_z[0], &channel), tr(&b_z[1], &channel)];

    // Route (ii): closed forms in terms of Q.
    let kd = kd_distribution(rho, basis)?;
    let q_jk = kd.get(j, k);
    let row: Complex64 = (0..d).map(|m| kd.get(j, m)).sum();
    let pw = [q_jk, row - q_jk];
    let p_plus = kd.b_marginal(k);
    let p = [p_plus, 1.0 - p_plus];
    let q_plus = tr(&b_z[0], &dephased);
    let q = [q_plus, 1.0 - q_plus];
    let a_plus = kd.a_marginal(j);
    let a = [a_plus, 1.0 - a_plus];
    let (pm, pd) = (cfg.p_m, cfg.p_d);
    let mut f2 = [[0.0; 2]; 2];
    let mut f3 = [[0.0; 2]; 2];
    for s in Sign::BOTH {
        for z in Sign::BOTH {
            let zi = z.index();
            let base = 0.5 * (1.0 - pd) * p[zi] + 0.5 * pd * q[zi];
            f2[s.index()][zi] = base + 0.5 * s.value() * pm * (2.0 * pw[zi].re - p[zi]);
            f3[s.index()][zi] = base + s.value() * pm * pw[zi].im;
        }
    }
    let f1 = p;
    let f4 = [(1.0 - pm) / 2.0 + pm * a[0], (1.0 - pm) / 2.0 + pm * a[1]];
    let f5 = [0.5, 0.5];
    let f6 = [(1.0 - pd) * p[0] + pd * q[0], (1.0 - pd) * p[1] + pd * q[1]];

    let pairs = [
        (&m1[..], &f1[..]),
        (&m4[..], &f4[..]),
        (&m6[..], &f6[..]),
        (&m2[0][..], &f2[0][..]),
        (&m2[1][..], &f2[1][..]),
        (&m3[0][..], &f3[0][..]),
        (&m3[1][..], &f3[1][..]),
    ];
    let route_deviation = pairs
        .iter()
        .flat_map(|(u, v)| u.iter().zip(v.iter()).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    if route_deviation > ROUTE_TOL {
        return Err(Error::InternalInconsistency { what: "protocol distribution routes", deviation: route_deviation });
    }
    Ok(ProtocolDistributions { j, k, config: cfg, f1, f2, f3, f4, f5, f6, p, q, route_deviation })
}

/// Deviations of the operational-equivalence identities between protocols.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarginalizationReport {
    /// `max_x |f4(x) - sum_z f2(x,z)|`
    pub noisy_a: f64,
    /// `max_y |f5(y) - sum_z f3(y,z)|`
    pub coin: f64,
    /// `max_z |f6(z) - sum_x f2(x,z)|`
    pub dephase_x: f64,
    /// `max_z |f6(z) - sum_y f3(y,z)|`
    pub dephase_y: f64,
    /// Largest deviation of any table from a probability distribution.
    pub normalization: f64,
    pub max_deviation: f64,
    pub passed: bool,
}

pub fn marginalization_check(dists: &ProtocolDistributions) -> MarginalizationReport {
    let f = dists;
    let mut noisy_a = 0.0f64;
    let mut coin = 0.0f64;
    let mut dephase_x = 0.0f64;
    let mut dephase_y = 0.0f64;
    for s in 0..2 {
        noisy_a = noisy_a.max((f.f4[s] - f.f2[s][0] - f.f2[s][1]).abs());
        coin = coin.max((f.f5[s] - f.f3[s][0] - f.f3[s][1]).abs());
        dephase_x = dephase_x.max((f.f6[s] - f.f2[0][s] - f.f2[1][s]).abs());
        dephase_y = dephase_y.max((f.f6[s] - f.f3[0][s] - f.f3[1][s]).abs());
    }
    let laws: Vec<OutcomeLaw> = Protocol::ALL.iter().map(|&p| dists.law(p)).collect();
    let normalization = laws
        .iter()
        .map(|l| {
            let below = l.entries.iter().map(|(_, p)| (-p).max(0.0)).fold(0.0, f64::max);
            below.max((l.total() - 1.0).abs())
        })
        .fold(0.0, f64::max);
    let max_deviation = noisy_a.max(coin).max(dephase_x).max(dephase_y).max(normalization);
    MarginalizationReport {
        noisy_a,
        coin,
        dephase_x,
        dephase_y,
        normalization,
        max_deviation,
        passed: max_deviation <= crate::ALGEBRAIC_TOL,
    }
}
