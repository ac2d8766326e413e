//! Contextuality certificates from KD nonpositivity.

use alloc::vec::Vec;

use core::f64::consts::FRAC_PI_4;

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::hvm::{build_hvm, epsilon_limit, verify_correctness, verify_noncontextuality, CorrectnessReport, NoncontextualityReport, KD_POSITIVE_TOL};
use crate::kd::{kd_distribution, KdDistribution};
use crate::protocols::{exact_distributions, WeakMeasurementConfig};
use crate::state::DensityMatrix;

/// A margin must exceed this to count as strictly positive.
pub const STRICT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    Contextual,
    NoncontextualModelExists,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertificationVerdict {
    pub verdict: Verdict,
    pub epsilon: f64,
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub nonpositivity: f64,
    /// `3 d^2 epsilon`
    #[cfg_attr(feature = "serde", serde(rename = "threshold_3d2eps"))]
    pub threshold: f64,
    /// `min(N, pi/4)`, the level the contextual branch tests against.
    pub delta: f64,
    /// `delta - 3 d^2 epsilon`
    pub contextual_margin: f64,
    pub lemma: LemmaThresholds,
    /// Largest cap margin over all `(j, k)`; `None` when `epsilon > pi/4`.
    pub witness_margins: Option<CapMargins>,
    pub correctness: Option<CorrectnessReport>,
    pub noncontextuality: Option<NoncontextualityReport>,
}

pub fn certify(rho: &DensityMatrix, basis: &BasisPair, epsilon: f64) -> Result<CertificationVerdict> {
    WeakMeasurementConfig::new(epsilon)?;
    let q = kd_distribution(rho, basis)?;
    let d = basis.dim() as f64;
    let n = q.nonpositivity();
    let threshold = 3.0 * d * d * epsilon;
    let delta = n.min(FRAC_PI_4);
    let contextual_margin = delta - threshold;
    let lemma = lemma_thresholds(&q);
    let witness_margins = if epsilon <= FRAC_PI_4 { Some(max_cap_margins(rho, basis, epsilon)?) } else { None };

    let mut out = CertificationVerdict {
        verdict: Verdict::Indeterminate,
        epsilon,
        nonpositivity: n,
        threshold,
        delta,
        contextual_margin,
        lemma,
        witness_margins,
        correctness: None,
        noncontextuality: None,
    };
    if epsilon <= FRAC_PI_4 && contextual_margin > STRICT_MARGIN {
        out.verdict = Verdict::Contextual;
    } else if n <= KD_POSITIVE_TOL && epsilon < epsilon_limit() {
        let model = build_hvm(rho, basis, epsilon)?;
        let correct = verify_correctness(&model, rho, basis, epsilon)?;
        let noncontextual = verify_noncontextuality(&model);
        if correct.passed && noncontextual.passed {
            out.verdict = Verdict::NoncontextualModelExists;
        }
        out.correctness = Some(correct);
        out.noncontextuality = Some(noncontextual);
    }
    Ok(out)
}

/// Per-entry couplings below which a single KD entry already rules out a
/// noncontextual model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LemmaThresholds {
    /// `min(|Im Q_{j,k}|, pi/4)`
    pub imaginary: Vec<Vec<f64>>,
    /// `min(-Re Q_{j,k}, pi/4)` where `Re Q_{j,k} < 0`, else 0.
    pub real: Vec<Vec<f64>>,
    pub best: f64,
    /// `(j, k)` of the best entry, if any threshold is positive.
    pub best_entry: Option<(usize, usize)>,
}

/// Entries within `1e-12` of real or nonnegative count as such.
pub fn lemma_thresholds(q: &KdDistribution) -> LemmaThresholds {
    let d = q.dim();
    let clip = |v: f64| if v > crate::ALGEBRAIC_TOL { v.min(FRAC_PI_4) } else { 0.0 };
    let table = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> { (0..d).map(|j| (0..d).map(|k| f(j, k)).collect()).collect() };
    let imaginary = table(&|j, k| clip(q.get(j, k).im.abs()));
    let real = table(&|j, k| clip(-q.get(j, k).re));
    let mut best = 0.0;
    let mut best_entry = None;
    for j in 0..d {
        for k in 0..d {
            let v = imaginary[j][k].max(real[j][k]);
            if v > best {
                best = v;
                best_entry = Some((j, k));
            }
        }
    }
    LemmaThresholds { imaginary, real, best, best_entry }
}

/// Quantum statistics minus the largest values any noncontextual model can
/// produce. A positive entry witnesses contextuality at this finite coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CapMargins {
    pub j: usize,
    pub k: usize,
    /// `f3(+1,+1) - (p/2 + p_d)`
    pub f3_plus: f64,
    /// `f3(-1,+1) - (p/2 + p_d)`
    pub f3_minus: f64,
    /// `f2(-1,+1) - ((1 + p_m) p / 2 + p_d)`
    pub f2_minus: f64,
}

impl CapMargins {
    pub fn max(&self) -> f64 {
        self.f3_plus.max(self.f3_minus).max(self.f2_minus)
    }
}

pub fn hvm_cap_violation(rho: &DensityMatrix, basis: &BasisPair, j: usize, k: usize, epsilon: f64) -> Result<CapMargins> {
    if epsilon > FRAC_PI_4 {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let f = exact_distributions(rho, basis, j, k, epsilon)?;
    let (pm, pd) = (f.config.p_m, f.config.p_d);
    let p = f.p[0];
    let cap3 = 0.5 * p + pd;
    let cap2 = 0.5 * (1.0 + pm) * p + pd;
    Ok(CapMargins { j, k, f3_plus: f.f3[0][0] - cap3, f3_minus: f.f3[1][0] - cap3, f2_minus: f.f2[1][0] - cap2 })
}

/// Cap margins of the `(j, k)` pair with the largest margin.
pub fn max_cap_margins(rho: &DensityMatrix, basis: &BasisPair, epsilon: f64) -> Result<CapMargins> {
    let d = basis.dim();
    let all: Vec<CapMargins> = (0..d * d).map(|i| hvm_cap_violation(rho, basis, i / d, i % d, epsilon)).collect::<Result<_>>()?;
    Ok(all.into_iter().fold(None::<CapMargins>, |best, m| match best {
        Some(b) if b.max() >= m.max() => Some(b),
        _ => Some(m),
    })
    .expect("at least one index pair"))
}
