//! An explicit noncontextual hidden-variable model for KD-positive states.
//!
//! The ontic space is `{0..d-1}`, one point per `B` eigenvector. All kernels
//! are stored as dense tables so a model can be exported, audited, or
//! perturbed and re-verified.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent on some targets and toolchains
use num_traits::Float;

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::kd::{kd_distribution, WEAK_VALUE_FLOOR};
use crate::linalg::trace;
use crate::protocols::{exact_distributions, Outcome, OutcomeLaw, Protocol, Sign, WeakMeasurementConfig};
use crate::state::DensityMatrix;

/// Default bound on `N(rho)` for a state to count as KD-positive.
pub const KD_POSITIVE_TOL: f64 = 1e-10;

/// Largest coupling for which the kernels are guaranteed nonnegative.
pub fn epsilon_limit() -> f64 {
    5f64.sqrt() / 5.0
}

/// Table layout (`d` ontic states, `x`, `y` indexed by `Sign::index()`):
///
/// - `mu[l]`
/// - `xi_a[j * d + l]` is `xi_{A_j}(+1 | l)`
/// - `gamma_x[((j * 2 + x) * d + l) * d + l2]` is `Gamma^X_j(x, l2 | l)`, same for `gamma_y`
/// - `gamma_d[(j * d + l) * d + l2]` is `Gamma_{D_j}(l2 | l)`, same for `m`
///
/// `xi_{B_k}(z | l)` is deterministic: `z = +1` iff `l = k`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HiddenVariableModel {
    pub d: usize,
    pub config: WeakMeasurementConfig,
    pub mu: Vec<f64>,
    pub xi_a: Vec<f64>,
    pub gamma_x: Vec<f64>,
    pub gamma_y: Vec<f64>,
    pub gamma_d: Vec<f64>,
    pub m: Vec<f64>,
}

impl HiddenVariableModel {
    fn kernel_index(&self, j: usize, s: Sign, l: usize, l2: usize) -> usize {
        ((j * 2 + s.index()) * self.d + l) * self.d + l2
    }

    pub fn gamma_x(&self, j: usize, x: Sign, l: usize, l2: usize) -> f64 {
        self.gamma_x[self.kernel_index(j, x, l, l2)]
    }

    pub fn gamma_y(&self, j: usize, y: Sign, l: usize, l2: usize) -> f64 {
        self.gamma_y[self.kernel_index(j, y, l, l2)]
    }

    pub fn gamma_d(&self, j: usize, l: usize, l2: usize) -> f64 {
        self.gamma_d[(j * self.d + l) * self.d + l2]
    }

    pub fn xi_a(&self, j: usize, x: Sign, l: usize) -> f64 {
        let plus = self.xi_a[j * self.d + l];
        match x {
            Sign::Plus => plus,
            Sign::Minus => 1.0 - plus,
        }
    }

    pub fn xi_b(&self, k: usize, z: Sign, l: usize) -> f64 {
        if (l == k) == (z == Sign::Plus) {
            1.0
        } else {
            0.0
        }
    }

    /// Smallest entry across all kernels and response tables.
    pub fn min_entry(&self) -> f64 {
        let xi_minus = self.xi_a.iter().map(|p| 1.0 - p);
        self.mu
            .iter()
            .chain(&self.xi_a)
            .chain(&self.gamma_x)
            .chain(&self.gamma_y)
            .chain(&self.gamma_d)
            .chain(&self.m)
            .copied()
            .chain(xi_minus)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn build_hvm(rho: &DensityMatrix, basis: &BasisPair, epsilon: f64) -> Result<HiddenVariableModel> {
    build_hvm_with_tolerance(rho, basis, epsilon, KD_POSITIVE_TOL)
}

/// Builds the model, accepting `N(rho) <= kd_tol`.
///
/// For states that are KD-positive only within a tolerance, `Re w` is clamped
/// into `[0, 1]` and the clamped value is used in both `xi_A` and `Gamma^X`, so
/// the model stays a valid noncontextual model of slightly different
/// statistics.
pub fn build_hvm_with_tolerance(rho: &DensityMatrix, basis: &BasisPair, epsilon: f64, kd_tol: f64) -> Result<HiddenVariableModel> {
    let config = WeakMeasurementConfig::new(epsilon)?;
    if epsilon >= epsilon_limit() {
        return Err(Error::EpsilonTooLarge(epsilon));
    }
    let q = kd_distribution(rho, basis)?;
    if q.nonpositivity() > kd_tol {
        return Err(Error::NotKdPositive(q.nonpositivity()));
    }
    let d = basis.dim();
    let (pm, pd) = (config.p_m, config.p_d);
    let mu: Vec<f64> = (0..d).map(|l| q.b_marginal(l).max(0.0)).collect();

    let mut xi_a = vec![0.0; d * d];
    for j in 0..d {
        for l in 0..d {
            xi_a[j * d + l] = match q.weak_values().get(j, l) {
                Some(w) => w.re.clamp(0.0, 1.0),
                None if mu[l] > WEAK_VALUE_FLOOR => return Err(Error::UndefinedWeakValue { j, lambda: l }),
                // Unreachable ontic state: any valid response completes the model.
                None => 0.5,
            };
        }
    }

    // m_j(l2 | l) = q^{j, l2}_{+1}, the same row for every l.
    let mut m = vec![0.0; d * d * d];
    for j in 0..d {
        let refl = basis.reflection(j);
        let dephased = &refl * rho.matrix() * &refl;
        for l2 in 0..d {
            let q_plus = trace(&(basis.b_projector(l2) * &dephased)).re.max(0.0);
            for l in 0..d {
                m[(j * d + l) * d + l2] = q_plus;
            }
        }
    }

    let mut gamma_x = vec![0.0; 2 * d * d * d];
    let mut gamma_y = vec![0.0; 2 * d * d * d];
    for j in 0..d {
        for s in Sign::BOTH {
            for l in 0..d {
                for l2 in 0..d {
                    let idx = ((j * 2 + s.index()) * d + l) * d + l2;
                    let mix = 0.5 * pd * m[(j * d + l) * d + l2];
                    let stay_x = 0.5 * (1.0 - pd) + 0.5 * s.value() * pm * (2.0 * xi_a[j * d + l2] - 1.0);
                    let stay_y = 0.5 * (1.0 - pd);
                    let delta = if l == l2 { 1.0 } else { 0.0 };
                    gamma_x[idx] = delta * stay_x + mix;
                    gamma_y[idx] = delta * stay_y + mix;
                }
            }
        }
    }

    Ok(HiddenVariableModel { d, config, mu, xi_a, gamma_x, gamma_y, gamma_d: m.clone(), m })
}

/// Evaluates `sum_{l, l2} mu(l) Gamma(. , l2 | l) xi(. | l2)` for one protocol.
pub fn hvm_predict(model: &HiddenVariableModel, protocol: Protocol, j: usize, k: usize) -> Result<OutcomeLaw> {
    let d = model.d;
    for i in [j, k] {
        if i >= d {
            return Err(Error::IndexOutOfRange { index: i, dim: d });
        }
    }
    let pm = model.config.p_m;
    let pd = model.config.p_d;
    let prob = |o: &Outcome| -> f64 {
        let z = o.z.unwrap_or(Sign::Plus);
        match protocol {
            Protocol::MeasureB => (0..d).map(|l| model.mu[l] * model.xi_b(k, z, l)).sum(),
            Protocol::WeakXThenB | Protocol::WeakYThenB => {
                let s = o.x.or(o.y).expect("outcome fits protocol");
                let mut acc = 0.0;
                for l in 0..d {
                    for l2 in 0..d {
                        let g = if protocol == Protocol::WeakXThenB { model.gamma_x(j, s, l, l2) } else { model.gamma_y(j, s, l, l2) };
                        acc += model.mu[l] * g * model.xi_b(k, z, l2);
                    }
                }
                acc
            }
            Protocol::NoisyA => {
                let x = o.x.expect("outcome fits protocol");
                (0..d).map(|l| model.mu[l] * ((1.0 - pm) / 2.0 + pm * model.xi_a(j, x, l))).sum()
            }
            Protocol::Coin => 0.5,
            Protocol::DephaseThenB => {
                let mut acc = 0.0;
                for l in 0..d {
                    for l2 in 0..d {
                        let stay = if l == l2 { 1.0 - pd } else { 0.0 };
                        acc += model.mu[l] * (stay + pd * model.gamma_d(j, l, l2)) * model.xi_b(k, z, l2);
                    }
                }
                acc
            }
        }
    };
    let entries = protocol.outcomes().into_iter().map(|o| (o, prob(&o))).collect();
    Ok(OutcomeLaw { protocol, entries })
}

/// Largest gap between model predictions and quantum statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrectnessReport {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    /// Protocols 4 to 6, which follow from the first three by marginalization.
    pub derived: f64,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Compares predictions with `exact_distributions` for every `(j, k)`; passes
/// at deviations up to `1e-10`.
pub fn verify_correctness(model: &HiddenVariableModel, rho: &DensityMatrix, basis: &BasisPair, epsilon: f64) -> Result<CorrectnessReport> {
    let d = basis.dim();
    if model.d != d {
        return Err(Error::DimensionMismatch { expected: d, found: model.d });
    }
    let mut dev = [0.0f64; 4];
    for j in 0..d {
        for k in 0..d {
            let exact = exact_distributions(rho, basis, j, k, epsilon)?;
            for p in Protocol::ALL {
                let gap = hvm_predict(model, p, j, k)?.max_abs_diff(&exact.law(p));
                let slot = match p {
                    Protocol::MeasureB => 0,
                    Protocol::WeakXThenB => 1,
                    Protocol::WeakYThenB => 2,
                    _ => 3,
                };
                dev[slot] = dev[slot].max(gap);
            }
        }
    }
    let max_deviation = dev.iter().copied().fold(0.0, f64::max);
    Ok(CorrectnessReport {
        f1: dev[0],
        f2: dev[1],
        f3: dev[2],
        derived: dev[3],
        max_deviation,
        passed: max_deviation <= crate::COMPOSED_TOL,
    })
}

/// Deviations of the noncontextuality constraints and of kernel validity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoncontextualityReport {
    /// `sum_{l2} Gamma^Y(y, l2 | l) = 1/2`
    pub coin: f64,
    /// `sum_{l2} Gamma^X(x, l2 | l) = (1 - p_m)/2 + p_m xi_A(x | l)`
    pub noisy_a: f64,
    /// `sum_x Gamma^X(x, l2 | l) = (1 - p_d) delta + p_d Gamma_D(l2 | l)`
    pub dephase_x: f64,
    /// The same for `Gamma^Y`.
    pub dephase_y: f64,
    /// Deviation of `mu`, `Gamma_D` and `m` from being stochastic.
    pub stochastic: f64,
    /// Smallest table entry.
    pub min_entry: f64,
    pub max_deviation: f64,
    pub passed: bool,
}

pub fn verify_noncontextuality(model: &HiddenVariableModel) -> NoncontextualityReport {
    let d = model.d;
    let (pm, pd) = (model.config.p_m, model.config.p_d);
    let mut coin = 0.0f64;
    let mut noisy_a = 0.0f64;
    let mut dephase_x = 0.0f64;
    let mut dephase_y = 0.0f64;
    let mut stochastic = (model.mu.iter().sum::<f64>() - 1.0).abs();
    for j in 0..d {
        for l in 0..d {
            for s in Sign::BOTH {
                let sx: f64 = (0..d).map(|l2| model.gamma_x(j, s, l, l2)).sum();
                let sy: f64 = (0..d).map(|l2| model.gamma_y(j, s, l, l2)).sum();
                coin = coin.max((sy - 0.5).abs());
                noisy_a = noisy_a.max((sx - ((1.0 - pm) / 2.0 + pm * model.xi_a(j, s, l))).abs());
            }
            for l2 in 0..d {
                let stay = if l == l2 { 1.0 - pd } else { 0.0 };
                let target = stay + pd * model.gamma_d(j, l, l2);
                let sx: f64 = Sign::BOTH.iter().map(|&s| model.gamma_x(j, s, l, l2)).sum();
                let sy: f64 = Sign::BOTH.iter().map(|&s| model.gamma_y(j, s, l, l2)).sum();
                dephase_x = dephase_x.max((sx - target).abs());
                dephase_y = dephase_y.max((sy - target).abs());
            }
            let row_d: f64 = (0..d).map(|l2| model.gamma_d(j, l, l2)).sum();
            let row_m: f64 = (0..d).map(|l2| model.m[(j * d + l) * d + l2]).sum();
            stochastic = stochastic.max((row_d - 1.0).abs()).max((row_m - 1.0).abs());
        }
    }
    let min_entry = model.min_entry();
    let max_deviation = coin.max(noisy_a).max(dephase_x).max(dephase_y).max(stochastic).max((-min_entry).max(0.0));
    NoncontextualityReport {
        coin,
        noisy_a,
        dephase_x,
        dephase_y,
        stochastic,
        min_entry,
        max_deviation,
        passed: max_deviation <= crate::ALGEBRAIC_TOL,
    }
}
