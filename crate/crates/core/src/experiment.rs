//! The two-party experiment: Alice prepares pure states in shuffled rounds,
//! Bob picks a protocol cell for every delivery, and only Alice keeps track of
//! which state went where.

use alloc::format;
use alloc::vec::Vec;

use core::f64::consts::FRAC_PI_4;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::basis::BasisPair;
use crate::certify::{certify, CertificationVerdict, STRICT_MARGIN};
use crate::error::{Error, Result};
use crate::geometry::{analyze_candidate, pure_positive_search_with, ExoticAnalysis, ExoticConfig, SearchConfig};
use crate::hvm::{build_hvm_with_tolerance, verify_correctness, verify_noncontextuality, CorrectnessReport, NoncontextualityReport};
use crate::kd::{kd_distribution, reconstruct_matrix, DEFAULT_OVERLAP_FLOOR};
use crate::protocols::{
    all_distributions, estimate_kd_with_confidence, CountTable, KdEstimate, Outcome, OutcomeLaw, Protocol, Setting, Sign,
    WeakMeasurementConfig, DEFAULT_CONFIDENCE,
};
use crate::rng::{cell_stream, domain};
use crate::state::{DensityMatrix, PureState};

/// Largest dimension a [`PublicEntry`] can index.
pub const MAX_DIM: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct AliceConfig {
    pub states: Vec<PureState>,
    /// Number of rounds `M`; every round delivers each state once.
    pub rounds: u64,
    pub basis: BasisPair,
    pub epsilon: f64,
    mixture: DensityMatrix,
}

impl AliceConfig {
    pub fn new(states: Vec<PureState>, rounds: u64, basis: BasisPair, epsilon: f64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidConfig("Alice needs at least one state".into()));
        }
        if states.len() > u32::MAX as usize {
            return Err(Error::InvalidConfig(format!("{} states do not fit a 32-bit ledger", states.len())));
        }
        if rounds == 0 {
            return Err(Error::InvalidConfig("rounds must be at least 1".into()));
        }
        let d = basis.dim();
        if d > MAX_DIM {
            return Err(Error::InvalidConfig(format!("dimension {d} exceeds {MAX_DIM}")));
        }
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: s.dim() });
        }
        WeakMeasurementConfig::new(epsilon)?;
        let mixture = DensityMatrix::uniform_mixture(&states)?;
        Ok(Self { states, rounds, basis, epsilon, mixture })
    }

    /// `rho* = (1/N) sum_s |psi_s><psi_s|`, the state Bob effectively receives.
    pub fn mixture(&self) -> &DensityMatrix {
        &self.mixture
    }

    pub fn deliveries(&self) -> u64 {
        self.rounds * self.states.len() as u64
    }
}

/// Bob's choice of cell for each delivery: a protocol with probability
/// proportional to its weight, then a uniform `(j, k)` among its cells.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BobPolicy {
    /// Indexed by protocol number minus one.
    pub weights: [f64; 6],
}

impl BobPolicy {
    /// Every cell of the grid equally likely.
    pub fn uniform(d: usize) -> Self {
        Self { weights: Protocol::ALL.map(|p| Setting::cell_count(p, d) as f64) }
    }

    pub fn new(weights: [f64; 6]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || total <= 0.0 {
            return Err(Error::InvalidConfig(format!("policy weights {weights:?} must be nonnegative with positive sum")));
        }
        Ok(Self { weights })
    }

    /// Probability of each cell, in `Setting::grid(d)` order.
    pub fn cell_probabilities(&self, d: usize) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        Setting::grid(d)
            .iter()
            .map(|s| self.weights[usize::from(s.protocol.id() - 1)] / total / Setting::cell_count(s.protocol, d) as f64)
            .collect()
    }
}

/// One delivery as Bob publishes it: the cell and the outcome, nothing about
/// which state was sent. Unused outcome coordinates are 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PublicEntry {
    pub protocol: u8,
    pub j: u8,
    pub k: u8,
    pub x: i8,
    pub y: i8,
    pub z: i8,
}

impl PublicEntry {
    pub fn new(setting: Setting, outcome: Outcome) -> Self {
        let v = |s: Option<Sign>| s.map_or(0, Sign::as_i8);
        Self { protocol: setting.protocol.id(), j: setting.j as u8, k: setting.k as u8, x: v(outcome.x), y: v(outcome.y), z: v(outcome.z) }
    }

    pub fn setting(&self) -> Result<Setting> {
        Ok(Setting::new(Protocol::from_id(self.protocol)?, usize::from(self.j), usize::from(self.k)))
    }

    pub fn outcome(&self) -> Outcome {
        Outcome { x: Sign::from_i8(self.x), y: Sign::from_i8(self.y), z: Sign::from_i8(self.z) }
    }
}

/// Everything Bob announces. Entry `i` is delivery `i % states_per_round` of
/// round `i / states_per_round`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PublicRecord {
    pub d: usize,
    pub states_per_round: usize,
    pub rounds: u64,
    pub epsilon: f64,
    pub policy: BobPolicy,
    pub entries: Vec<PublicEntry>,
}

impl PublicRecord {
    pub fn counts(&self) -> Result<CountTable> {
        self.counts_where(|_| true)
    }

    /// Counts over the entries whose position passes `keep`.
    pub fn counts_where(&self, keep: impl Fn(usize) -> bool) -> Result<CountTable> {
        let grid = Setting::grid(self.d);
        let mut dense: Vec<[u64; 4]> = alloc::vec![[0; 4]; grid.len()];
        for (i, e) in self.entries.iter().enumerate() {
            if !keep(i) {
                continue;
            }
            let setting = e.setting()?;
            if setting.j >= self.d || setting.k >= self.d {
                return Err(Error::IndexOutOfRange { index: setting.j.max(setting.k), dim: self.d });
            }
            let o = e.outcome();
            let slot = o
                .index_in(setting.protocol)
                .ok_or_else(|| Error::InvalidConfig(format!("entry {i} has an outcome that does not fit protocol {}", e.protocol)))?;
            dense[setting.grid_index(self.d)][slot] += 1;
        }
        let mut table = CountTable::new(self.d);
        for (s, c) in grid.iter().zip(&dense) {
            let n = s.protocol.outcomes().len();
            if c.iter().any(|&x| x > 0) {
                table.add_counts(*s, &c[..n])?;
            }
        }
        Ok(table)
    }
}

/// Alice's private list: the index of the state behind each public entry.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SecretLedger {
    pub states: Vec<u32>,
}

/// Precomputed laws for every state and cell. Each delivery draws from its
/// own stream, so any subset of rounds can be simulated independently.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    d: usize,
    states: usize,
    rounds: u64,
    epsilon: f64,
    policy: BobPolicy,
    cumulative: Vec<f64>,
    grid: Vec<Setting>,
    /// `laws[s][cell]`
    laws: Vec<Vec<OutcomeLaw>>,
    master_seed: u64,
}

impl ExperimentPlan {
    pub fn new(alice: &AliceConfig, policy: &BobPolicy, master_seed: u64) -> Result<Self> {
        let policy = BobPolicy::new(policy.weights)?;
        let d = alice.basis.dim();
        let grid = Setting::grid(d);
        let mut cumulative = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        for p in policy.cell_probabilities(d) {
            acc += p;
            cumulative.push(acc);
        }
        let mut laws = Vec::with_capacity(alice.states.len());
        for psi in &alice.states {
            let dists = all_distributions(&DensityMatrix::from_pure(psi), &alice.basis, alice.epsilon)?;
            laws.push(grid.iter().map(|s| dists[s.j * d + s.k].law(s.protocol)).collect());
        }
        Ok(Self { d, states: alice.states.len(), rounds: alice.rounds, epsilon: alice.epsilon, policy, cumulative, grid, laws, master_seed })
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn states_per_round(&self) -> usize {
        self.states
    }

    /// Order in which Alice sends her states in round `r`.
    pub fn round_order(&self, r: u64) -> Vec<u32> {
        let mut order: Vec<u32> = (0..self.states as u32).collect();
        order.shuffle(&mut cell_stream(self.master_seed, domain::ROUND, r));
        order
    }

    /// Entries and ledger for round `r`.
    pub fn simulate_round(&self, r: u64) -> (Vec<PublicEntry>, Vec<u32>) {
        let order = self.round_order(r);
        let entries = order
            .iter()
            .enumerate()
            .map(|(s, &state)| {
                let mut rng = cell_stream(self.master_seed, domain::DELIVERY, r * self.states as u64 + s as u64);
                let u: f64 = rng.random();
                let cell = self.cumulative.partition_point(|&c| c <= u).min(self.grid.len() - 1);
                let outcome = self.laws[state as usize][cell].invert(rng.random());
                PublicEntry::new(self.grid[cell], outcome)
            })
            .collect();
        (entries, order)
    }

    /// Assembles rounds simulated in any order into a record, in round order.
    pub fn assemble(&self, rounds: impl IntoIterator<Item = (Vec<PublicEntry>, Vec<u32>)>) -> (PublicRecord, SecretLedger) {
        let total = (self.rounds as usize).saturating_mul(self.states);
        let mut entries = Vec::with_capacity(total);
        let mut ledger = Vec::with_capacity(total);
        for (e, l) in rounds {
            entries.extend(e);
            ledger.extend(l);
        }
        let record = PublicRecord { d: self.d, states_per_round: self.states, rounds: self.rounds, epsilon: self.epsilon, policy: self.policy, entries };
        (record, SecretLedger { states: ledger })
    }
}

pub fn run_experiment(alice: &AliceConfig, policy: &BobPolicy, master_seed: u64) -> Result<(PublicRecord, SecretLedger)> {
    let plan = ExperimentPlan::new(alice, policy, master_seed)?;
    Ok(plan.assemble((0..plan.rounds()).map(|r| plan.simulate_round(r))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// Shots required in every cell the estimator reads.
    pub min_samples: u64,
    pub confidence: f64,
    /// `N_hat` within this many half-widths of zero counts as KD-positive.
    pub band_factor: f64,
    pub search: SearchConfig,
    pub exotic: ExoticConfig,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { min_samples: 1000, confidence: DEFAULT_CONFIDENCE, band_factor: 3.0, search: SearchConfig::default(), exotic: ExoticConfig::default(), seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BobVerdict {
    /// The pooled data already exceed `3 d^2 epsilon`.
    BobDataContextual,
    /// KD-positive pooled state, but every decomposition into pure states has
    /// a component with `N` above the threshold.
    AliceContextualityVerified,
    /// The pooled data admit a noncontextual account.
    CannotVerify,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCell {
    pub setting: Setting,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    /// Hoeffding half-width of each frequency at the report's confidence.
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HvmCheck {
    pub correctness: CorrectnessReport,
    pub noncontextuality: NoncontextualityReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BobReport {
    pub verdict: BobVerdict,
    pub deliveries: u64,
    pub cells: Vec<EmpiricalCell>,
    pub estimate: KdEstimate,
    /// PSD projection of the reconstructed state.
    pub rho_hat: DensityMatrix,
    pub nonpositivity: f64,
    /// `band_factor * nonpositivity_half_width`
    pub noise_band: f64,
    /// `3 d^2 epsilon`
    pub threshold: f64,
    /// Frobenius error bound on the reconstruction; widens hull and gap tolerances.
    pub reconstruction_radius: f64,
    /// Present when the pooled state is KD-positive within the band.
    pub hvm: Option<core::result::Result<HvmCheck, Error>>,
    pub geometry: Option<ExoticAnalysis>,
}

/// Bob's analysis of the pooled public record.
pub fn bob_analyze(record: &PublicRecord, basis: &BasisPair, config: &AnalysisConfig) -> Result<BobReport> {
    let d = basis.dim();
    if record.d != d {
        return Err(Error::DimensionMismatch { expected: d, found: record.d });
    }
    let counts = record.counts()?;
    counts.check_min_samples(config.min_samples)?;
    let epsilon = record.epsilon;
    let estimate = estimate_kd_with_confidence(&counts, basis, epsilon, config.confidence)?;
    let rho_hat = DensityMatrix::psd_projection(&reconstruct_matrix(&estimate.q, basis, DEFAULT_OVERLAP_FLOOR)?)?;
    let nonpositivity = kd_distribution(&rho_hat, basis)?.nonpositivity();
    let noise_band = config.band_factor * estimate.nonpositivity_half_width;
    let threshold = 3.0 * (d * d) as f64 * epsilon;
    let reconstruction_radius = estimate.reconstruction_radius(basis);
    let cells = empirical_cells(&counts, config.confidence);

    let mut hvm = None;
    let mut geometry = None;
    let verdict = if epsilon <= FRAC_PI_4 && nonpositivity - threshold > STRICT_MARGIN {
        BobVerdict::BobDataContextual
    } else if nonpositivity <= noise_band {
        hvm = Some(build_hvm_with_tolerance(&rho_hat, basis, epsilon, noise_band).map(|m| HvmCheck {
            correctness: verify_correctness(&m, &rho_hat, basis, epsilon).expect("model was built from this state"),
            noncontextuality: verify_noncontextuality(&m),
        }));
        let set = pure_positive_search_with(basis, &config.search, config.seed);
        let exotic_config = ExoticConfig {
            kd_tol: noise_band,
            hull_tol: config.exotic.hull_tol.max(reconstruction_radius),
            gap_tol: config.exotic.gap_tol.max(reconstruction_radius),
            floor: config.exotic.floor,
        };
        let analysis = analyze_candidate(&rho_hat, &set, &exotic_config, config.seed)?;
        let verified = epsilon <= FRAC_PI_4 && analysis.exotic && analysis.floor.as_ref().is_some_and(|f| f.delta - threshold > STRICT_MARGIN);
        geometry = Some(analysis);
        if verified {
            BobVerdict::AliceContextualityVerified
        } else {
            BobVerdict::CannotVerify
        }
    } else {
        BobVerdict::Indeterminate
    };
    Ok(BobReport {
        verdict,
        deliveries: record.entries.len() as u64,
        cells,
        estimate,
        rho_hat,
        nonpositivity,
        noise_band,
        threshold,
        reconstruction_radius,
        hvm,
        geometry,
    })
}

fn empirical_cells(counts: &CountTable, confidence: f64) -> Vec<EmpiricalCell> {
    let alpha = 1.0 - confidence;
    counts
        .cells()
        .map(|(s, c)| {
            let n: u64 = c.iter().sum();
            let frequencies = c.iter().map(|&x| if n > 0 { x as f64 / n as f64 } else { 0.0 }).collect();
            let half_width = if n > 0 { ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt() } else { f64::INFINITY };
            EmpiricalCell { setting: *s, counts: c.to_vec(), frequencies, half_width }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateReport {
    pub index: usize,
    pub deliveries: u64,
    /// Fewest shots in any cell the estimator reads.
    pub min_cell_count: u64,
    pub estimate: KdEstimate,
    pub rho_hat: DensityMatrix,
    pub nonpositivity: f64,
    /// Certification of the point estimate `rho_hat`.
    pub certification: CertificationVerdict,
    /// `N_hat - half_width > 3 d^2 epsilon`: contextual even at the edge of
    /// the confidence interval.
    pub exceeds_with_margin: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostselectionReport {
    pub threshold: f64,
    pub states: Vec<StateReport>,
}

impl PostselectionReport {
    pub fn any_contextual(&self) -> bool {
        self.states.iter().any(|s| s.certification.verdict == crate::certify::Verdict::Contextual)
    }
}

/// Alice splits Bob's record by her ledger and analyzes each state on its own.
pub fn alice_postselect(record: &PublicRecord, ledger: &SecretLedger, basis: &BasisPair, confidence: f64) -> Result<PostselectionReport> {
    if ledger.states.len() != record.entries.len() {
        return Err(Error::LedgerMismatch { ledger: ledger.states.len(), record: record.entries.len() });
    }
    let d = basis.dim();
    if record.d != d {
        return Err(Error::DimensionMismatch { expected: d, found: record.d });
    }
    if let Some(&bad) = ledger.states.iter().find(|&&s| s as usize >= record.states_per_round) {
        return Err(Error::InvalidConfig(format!("ledger names state {bad} but only {} were sent", record.states_per_round)));
    }
    let epsilon = record.epsilon;
    let threshold = 3.0 * (d * d) as f64 * epsilon;
    let mut states = Vec::with_capacity(record.states_per_round);
    for index in 0..record.states_per_round {
        let counts = record.counts_where(|i| ledger.states[i] as usize == index)?;
        let min_cell_count = CountTable::required_cells(d).iter().map(|s| counts.total(s)).min().unwrap_or(0);
        let deliveries = ledger.states.iter().filter(|&&s| s as usize == index).count() as u64;
        let estimate = estimate_kd_with_confidence(&counts, basis, epsilon, confidence)?;
        let rho_hat = DensityMatrix::psd_projection(&reconstruct_matrix(&estimate.q, basis, DEFAULT_OVERLAP_FLOOR)?)?;
        let nonpositivity = kd_distribution(&rho_hat, basis)?.nonpositivity();
        let certification = certify(&rho_hat, basis, epsilon)?;
        let exceeds_with_margin = epsilon <= FRAC_PI_4 && nonpositivity - estimate.nonpositivity_half_width - threshold > STRICT_MARGIN;
        states.push(StateReport { index, deliveries, min_cell_count, estimate, rho_hat, nonpositivity, certification, exceeds_with_margin });
    }
    Ok(PostselectionReport { threshold, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::Verdict;
    use crate::linalg::c;
    use alloc::vec;
    use core::f64::consts::FRAC_1_SQRT_2 as S;

    fn y_states() -> Vec<PureState> {
        vec![PureState::new(vec![c(S, 0.0), c(0.0, S)]).unwrap(), PureState::new(vec![c(S, 0.0), c(0.0, -S)]).unwrap()]
    }

    fn weak_heavy() -> BobPolicy {
        BobPolicy::new([0.05, 0.4, 0.4, 0.05, 0.05, 0.05]).unwrap()
    }

    #[test]
    fn mixture_of_y_states_is_maximally_mixed() {
        let alice = AliceConfig::new(y_states(), 10, BasisPair::qubit_mub(), 0.1).unwrap();
        assert!((alice.mixture().matrix() - DensityMatrix::maximally_mixed(2).matrix()).norm() < 1e-15);
        assert_eq!(alice.deliveries(), 20);
    }

    #[test]
    fn config_validation() {
        let basis = BasisPair::qubit_mub();
        assert!(AliceConfig::new(vec![], 1, basis.clone(), 0.1).is_err());
        assert!(AliceConfig::new(y_states(), 0, basis.clone(), 0.1).is_err());
        assert!(AliceConfig::new(y_states(), 1, basis.clone(), 0.0).is_err());
        assert!(AliceConfig::new(y_states(), 1, BasisPair::fourier(3), 0.1).is_err());
        assert!(BobPolicy::new([0.0; 6]).is_err());
        assert!(BobPolicy::new([1.0, -1.0, 1.0, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn uniform_policy_covers_the_grid_evenly() {
        let p = BobPolicy::uniform(3).cell_probabilities(3);
        assert_eq!(p.len(), Setting::grid(3).len());
        assert!(p.iter().all(|&x| (x - 1.0 / p.len() as f64).abs() < 1e-15));
    }

    #[test]
    fn rounds_send_each_state_once() {
        let alice = AliceConfig::new(y_states(), 50, BasisPair::qubit_mub(), 0.1).unwrap();
        let (record, ledger) = run_experiment(&alice, &BobPolicy::uniform(2), 3).unwrap();
        assert_eq!(record.entries.len(), 100);
        for round in ledger.states.chunks(2) {
            let mut r = round.to_vec();
            r.sort_unstable();
            assert_eq!(r, vec![0, 1]);
        }
        // both orders occur
        assert!(ledger.states.chunks(2).any(|r| r[0] == 0) && ledger.states.chunks(2).any(|r| r[0] == 1));
    }

    #[test]
    fn rounds_are_independent_of_order() {
        let alice = AliceConfig::new(y_states(), 20, BasisPair::qubit_mub(), 0.1).unwrap();
        let plan = ExperimentPlan::new(&alice, &BobPolicy::uniform(2), 9).unwrap();
        let (forward, fl) = plan.assemble((0..20).map(|r| plan.simulate_round(r)));
        let mut backward: Vec<_> = (0..20).rev().map(|r| plan.simulate_round(r)).collect();
        backward.reverse();
        let (back, bl) = plan.assemble(backward);
        assert_eq!(forward, back);
        assert_eq!(fl, bl);
        assert_eq!(run_experiment(&alice, &BobPolicy::uniform(2), 9).unwrap().0, forward);
    }

    #[test]
    fn entries_round_trip() {
        for s in Setting::grid(3) {
            for o in s.protocol.outcomes() {
                let e = PublicEntry::new(s, o);
                assert_eq!(e.setting().unwrap(), s);
                assert_eq!(e.outcome(), o);
            }
        }
    }

    #[test]
    fn counts_match_entries() {
        let alice = AliceConfig::new(y_states(), 500, BasisPair::qubit_mub(), 0.1).unwrap();
        let (record, _) = run_experiment(&alice, &BobPolicy::uniform(2), 4).unwrap();
        let mut table = CountTable::new(2);
        for e in &record.entries {
            table.record(e.setting().unwrap(), &e.outcome()).unwrap();
        }
        assert_eq!(record.counts().unwrap(), table);
    }

    #[test]
    fn ledger_length_is_checked() {
        let alice = AliceConfig::new(y_states(), 5, BasisPair::qubit_mub(), 0.1).unwrap();
        let (record, mut ledger) = run_experiment(&alice, &BobPolicy::uniform(2), 4).unwrap();
        ledger.states.pop();
        assert!(matches!(alice_postselect(&record, &ledger, &alice.basis, 0.99), Err(Error::LedgerMismatch { ledger: 9, record: 10 })));
    }

    #[test]
    fn too_few_samples_are_reported() {
        let alice = AliceConfig::new(y_states(), 5, BasisPair::qubit_mub(), 0.1).unwrap();
        let (record, _) = run_experiment(&alice, &BobPolicy::uniform(2), 4).unwrap();
        let err = bob_analyze(&record, &alice.basis, &AnalysisConfig::default()).unwrap_err();
        assert!(err.is_insufficient_data());
    }

    #[test]
    fn hidden_contextuality_at_strong_coupling_data() {
        // eps = 0.3: pooled I/2 is noncontextual; the split halves are not
        // certifiable either since 12 eps > N(|+i>).
        let alice = AliceConfig::new(y_states(), 60_000, BasisPair::qubit_mub(), 0.3).unwrap();
        let (record, ledger) = run_experiment(&alice, &weak_heavy(), 11).unwrap();
        let config = AnalysisConfig { search: SearchConfig { budget: 4, ..SearchConfig::default() }, ..AnalysisConfig::default() };
        let bob = bob_analyze(&record, &alice.basis, &config).unwrap();
        assert_eq!(bob.verdict, BobVerdict::CannotVerify);
        assert!(bob.hvm.as_ref().is_some_and(|h| h.is_ok()));
        let post = alice_postselect(&record, &ledger, &alice.basis, 0.99).unwrap();
        for s in &post.states {
            assert!((s.nonpositivity - (2f64.sqrt() - 1.0)).abs() < 0.1, "{}", s.nonpositivity);
            assert_ne!(s.certification.verdict, Verdict::Contextual);
        }
    }
}
