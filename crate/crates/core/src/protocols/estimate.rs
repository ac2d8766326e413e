use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent on some targets and toolchains
use num_traits::Float;

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::kd::KdDistribution;
use crate::linalg::{c, CMatrix};
use crate::protocols::kraus::WeakMeasurementConfig;
use crate::protocols::sampling::all_distributions;
use crate::protocols::{Outcome, Protocol, Setting};
use crate::state::DensityMatrix;

pub const DEFAULT_CONFIDENCE: f64 = 0.99;

// Outcome positions in canonical order for the two-outcome-pair protocols.
const PLUS_PLUS: usize = 0;
const MINUS_PLUS: usize = 2;

/// Outcome counts per `(protocol, j, k)` cell, in canonical outcome order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CountTable {
    d: usize,
    cells: BTreeMap<Setting, Vec<u64>>,
}

impl CountTable {
    pub fn new(d: usize) -> Self {
        Self { d, cells: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    fn slot(&mut self, setting: Setting) -> Result<&mut Vec<u64>> {
        if setting.j >= self.d || setting.k >= self.d {
            return Err(Error::IndexOutOfRange { index: setting.j.max(setting.k), dim: self.d });
        }
        let setting = Setting::new(setting.protocol, setting.j, setting.k);
        let n = setting.protocol.outcomes().len();
        Ok(self.cells.entry(setting).or_insert_with(|| alloc::vec![0; n]))
    }

    pub fn record(&mut self, setting: Setting, outcome: &Outcome) -> Result<()> {
        let i = outcome
            .index_in(setting.protocol)
            .ok_or_else(|| Error::InvalidConfig(format!("outcome {outcome:?} does not fit protocol {}", setting.protocol.id())))?;
        self.slot(setting)?[i] += 1;
        Ok(())
    }

    pub fn add_counts(&mut self, setting: Setting, counts: &[u64]) -> Result<()> {
        let slot = self.slot(setting)?;
        if counts.len() != slot.len() {
            return Err(Error::DimensionMismatch { expected: slot.len(), found: counts.len() });
        }
        for (s, c) in slot.iter_mut().zip(counts) {
            *s += c;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &CountTable) -> Result<()> {
        if other.d != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: other.d });
        }
        for (s, c) in &other.cells {
            self.add_counts(*s, c)?;
        }
        Ok(())
    }

    pub fn counts(&self, setting: &Setting) -> Option<&[u64]> {
        self.cells.get(&Setting::new(setting.protocol, setting.j, setting.k)).map(Vec::as_slice)
    }

    pub fn total(&self, setting: &Setting) -> u64 {
        self.counts(setting).map_or(0, |c| c.iter().sum())
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Setting, &[u64])> {
        self.cells.iter().map(|(s, c)| (s, c.as_slice()))
    }

    /// Cells the estimator reads: protocol 1 for every `k`, protocols 2 and 3
    /// for every `(j, k)`.
    pub fn required_cells(d: usize) -> Vec<Setting> {
        let mut out = Setting::cells(Protocol::MeasureB, d);
        out.extend(Setting::cells(Protocol::WeakXThenB, d));
        out.extend(Setting::cells(Protocol::WeakYThenB, d));
        out
    }

    /// First required cell with fewer than `required` shots.
    pub fn check_min_samples(&self, required: u64) -> Result<()> {
        for s in Self::required_cells(self.d) {
            let count = self.total(&s);
            if count < required {
                return Err(Error::InsufficientSamples { cell: cell_name(&s), count, required });
            }
        }
        Ok(())
    }
}

fn cell_name(s: &Setting) -> String {
    format!("protocol {} (j={}, k={})", s.protocol.id(), s.j, s.k)
}

/// Relative frequencies per cell, in canonical outcome order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frequencies {
    d: usize,
    cells: BTreeMap<Setting, Vec<f64>>,
}

impl Frequencies {
    pub fn from_counts(counts: &CountTable) -> Self {
        let cells = counts
            .cells
            .iter()
            .filter_map(|(s, c)| {
                let n: u64 = c.iter().sum();
                (n > 0).then(|| (*s, c.iter().map(|&x| x as f64 / n as f64).collect()))
            })
            .collect();
        Self { d: counts.d, cells }
    }

    /// The exact laws, i.e. the infinite-shot limit.
    pub fn exact(rho: &DensityMatrix, basis: &BasisPair, epsilon: f64) -> Result<Self> {
        let d = basis.dim();
        let dists = all_distributions(rho, basis, epsilon)?;
        let cells = Setting::grid(d)
            .into_iter()
            .map(|s| {
                let law = dists[s.j * d + s.k].law(s.protocol);
                (s, law.entries.iter().map(|(_, p)| *p).collect())
            })
            .collect();
        Ok(Self { d, cells })
    }

    pub fn get(&self, setting: &Setting) -> Option<&[f64]> {
        self.cells.get(setting).map(Vec::as_slice)
    }

    fn require(&self, s: Setting) -> Result<&[f64]> {
        self.get(&s).ok_or_else(|| Error::InsufficientSamples { cell: cell_name(&s), count: 0, required: 1 })
    }
}

/// An estimated KD distribution with per-entry Hoeffding half-widths.
#[derive(Debug, Clone, PartialEq)]
pub struct KdEstimate {
    pub q: KdDistribution,
    pub re_half_width: DMatrix<f64>,
    pub im_half_width: DMatrix<f64>,
    pub confidence: f64,
    /// `sum_{j,k} (hw_re + hw_im)`, which bounds `|N(Q_hat) - N(Q)|` when every
    /// entry lies inside its interval.
    pub nonpositivity_half_width: f64,
}

impl KdEstimate {
    pub fn max_half_width(&self) -> f64 {
        self.re_half_width.iter().chain(self.im_half_width.iter()).fold(0.0, |a, &b| a.max(b))
    }

    /// `sum_{j,k} (hw_re + hw_im)` weighted by `1/|<b_k|a_j>|`: a bound on the
    /// Frobenius-norm error of the reconstructed matrix before PSD projection.
    pub fn reconstruction_radius(&self, basis: &BasisPair) -> f64 {
        let d = self.q.dim();
        let mut r = 0.0;
        for j in 0..d {
            for k in 0..d {
                r += (self.re_half_width[(j, k)] + self.im_half_width[(j, k)]) / basis.overlap(j, k).norm();
            }
        }
        r
    }
}

/// Inverts protocol frequencies to `Q`:
///
/// `Re Q_{j,k} = [(f2(+,+) - f2(-,+)) / p_m + f1_k(+)] / 2`,
/// `Im Q_{j,k} = (f3(+,+) - f3(-,+)) / (2 p_m)`.
///
/// Both are exact for every coupling with `p_m > 0`; the `p_d` terms cancel in the
/// differences, so protocol 6 is not needed.
///
/// At `epsilon = pi/2` the coupling carries no information (`p_m = 0`) and the
/// inversion is rejected.
pub fn estimate_kd_from_frequencies(freqs: &Frequencies, epsilon: f64) -> Result<CMatrix> {
    let cfg = invertible_config(epsilon)?;
    let d = freqs.d;
    let mut q = CMatrix::zeros(d, d);
    for k in 0..d {
        let p_plus = freqs.require(Setting::new(Protocol::MeasureB, 0, k))?[0];
        for j in 0..d {
            let f2 = freqs.require(Setting::new(Protocol::WeakXThenB, j, k))?;
            let f3 = freqs.require(Setting::new(Protocol::WeakYThenB, j, k))?;
            let re = 0.5 * ((f2[PLUS_PLUS] - f2[MINUS_PLUS]) / cfg.p_m + p_plus);
            let im = (f3[PLUS_PLUS] - f3[MINUS_PLUS]) / (2.0 * cfg.p_m);
            q[(j, k)] = c(re, im);
        }
    }
    Ok(q)
}

fn invertible_config(epsilon: f64) -> Result<WeakMeasurementConfig> {
    let cfg = WeakMeasurementConfig::new(epsilon)?;
    if cfg.p_m <= crate::ALGEBRAIC_TOL {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(cfg)
}

pub fn estimate_kd(counts: &CountTable, basis: &BasisPair, epsilon: f64) -> Result<KdEstimate> {
    estimate_kd_with_confidence(counts, basis, epsilon, DEFAULT_CONFIDENCE)
}

/// Half-widths hold per entry at level `confidence`. For the real part the
/// error budget is split evenly between the protocol-2 difference (a mean of
/// a variable with range 2) and the protocol-1 frequency.
pub fn estimate_kd_with_confidence(counts: &CountTable, basis: &BasisPair, epsilon: f64, confidence: f64) -> Result<KdEstimate> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidConfig(format!("confidence {confidence} outside (0, 1)")));
    }
    let d = basis.dim();
    if counts.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: counts.dim() });
    }
    counts.check_min_samples(1)?;
    let cfg = invertible_config(epsilon)?;
    let q = estimate_kd_from_frequencies(&Frequencies::from_counts(counts), epsilon)?;
    let alpha = 1.0 - confidence;
    let hoeffding = |n: u64, a: f64| ((2.0 / a).ln() / (2.0 * n as f64)).sqrt();
    let mut re_hw = DMatrix::zeros(d, d);
    let mut im_hw = DMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let n1 = counts.total(&Setting::new(Protocol::MeasureB, 0, k));
            let n2 = counts.total(&Setting::new(Protocol::WeakXThenB, j, k));
            let n3 = counts.total(&Setting::new(Protocol::WeakYThenB, j, k));
            re_hw[(j, k)] = hoeffding(n2, alpha / 2.0) / cfg.p_m + 0.5 * hoeffding(n1, alpha / 2.0);
            im_hw[(j, k)] = hoeffding(n3, alpha) / cfg.p_m;
        }
    }
    let nonpositivity_half_width = re_hw.sum() + im_hw.sum();
    Ok(KdEstimate {
        q: KdDistribution::from_matrix(q)?,
        re_half_width: re_hw,
        im_half_width: im_hw,
        confidence,
        nonpositivity_half_width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kd::kd_distribution;
    use crate::linalg::max_abs_diff;
    use crate::protocols::sampling::simulate_counts;
    use crate::state::PureState;
    use alloc::vec;
    use core::f64::consts::FRAC_1_SQRT_2 as S;

    #[test]
    fn exact_frequencies_invert_exactly() {
        let basis = BasisPair::qubit_mub();
        let rho = DensityMatrix::from_pure(&PureState::new(vec![c(S, 0.0), c(0.0, S)]).unwrap());
        for eps in [0.05, 0.2, 0.4, core::f64::consts::FRAC_PI_4, 1.5] {
            let q = estimate_kd_from_frequencies(&Frequencies::exact(&rho, &basis, eps).unwrap(), eps).unwrap();
            let truth = kd_distribution(&rho, &basis).unwrap();
            assert!(max_abs_diff(&q, truth.matrix()) < 1e-12);
        }
    }

    #[test]
    fn uninformative_coupling_is_rejected() {
        let basis = BasisPair::qubit_mub();
        let rho = DensityMatrix::maximally_mixed(2);
        let eps = core::f64::consts::FRAC_PI_2;
        let freqs = Frequencies::exact(&rho, &basis, eps).unwrap();
        assert!(matches!(estimate_kd_from_frequencies(&freqs, eps), Err(Error::InvalidEpsilon(_))));
    }

    #[test]
    fn missing_cell_is_insufficient() {
        let basis = BasisPair::qubit_mub();
        let mut t = CountTable::new(2);
        t.add_counts(Setting::new(Protocol::MeasureB, 0, 0), &[3, 4]).unwrap();
        let err = estimate_kd(&t, &basis, 0.2).unwrap_err();
        assert!(err.is_insufficient_data());
    }

    #[test]
    fn a_eigenstate_has_small_imaginary_part() {
        let basis = BasisPair::qubit_mub();
        let rho = DensityMatrix::from_pure(&PureState::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap());
        let counts = simulate_counts(&rho, &basis, 0.2, |_| 20_000, 3).unwrap();
        let est = estimate_kd(&counts, &basis, 0.2).unwrap();
        for j in 0..2 {
            for k in 0..2 {
                assert!(est.q.get(j, k).im.abs() <= est.im_half_width[(j, k)]);
            }
        }
    }

    #[test]
    fn record_rejects_wrong_arity() {
        let mut t = CountTable::new(2);
        let o = Protocol::Coin.outcomes()[0];
        assert!(t.record(Setting::new(Protocol::MeasureB, 0, 1), &o).is_err());
        assert!(t.record(Setting::new(Protocol::Coin, 0, 0), &o).is_ok());
        assert_eq!(t.total(&Setting::new(Protocol::Coin, 1, 1)), 1);
    }
}
