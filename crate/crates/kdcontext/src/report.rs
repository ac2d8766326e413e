//! Serializable reports written by the CLI.

use std::collections::BTreeMap;
use std::path::PathBuf;

use kdcontext_core::experiment::{BobReport, HvmCheck, StateReport};
use kdcontext_core::geometry::{ExoticAnalysis, HullMembership, NegativityFloor, PositiveState, Provenance, SeparatingWitness};
use kdcontext_core::hvm::{CorrectnessReport, NoncontextualityReport};
use kdcontext_core::protocols::{KdEstimate, MarginalizationReport, Protocol};
use kdcontext_core::{BobVerdict, CertificationVerdict, HiddenVariableModel, KdDistribution, ProtocolDistributions};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::format::{matrix_to_json, outcome_key, vector_to_json, CellCounts, ComplexJson, KdJson};

fn real_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KdReport {
    pub d: usize,
    pub kd: KdJson,
    /// `Q_{j,k} / Tr(Pi^B_k rho)`, `null` where the denominator vanishes.
    pub weak_values: Vec<Vec<Option<ComplexJson>>>,
    pub a_marginals: Vec<f64>,
    pub b_marginals: Vec<f64>,
}

impl KdReport {
    pub fn new(q: &KdDistribution) -> Self {
        let d = q.dim();
        let w = q.weak_values();
        Self {
            d,
            kd: q.into(),
            weak_values: (0..d).map(|j| (0..d).map(|k| w.get(j, k).map(|z| [z.re, z.im])).collect()).collect(),
            a_marginals: (0..d).map(|j| q.a_marginal(j)).collect(),
            b_marginals: (0..d).map(|k| q.b_marginal(k)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactReport {
    pub epsilon: f64,
    pub p_m: f64,
    pub p_d: f64,
    pub probabilities: Vec<ProbabilityTable>,
    pub cells: Vec<ProtocolDistributions>,
    pub marginalization: Vec<MarginalizationReport>,
}

/// Outcome probabilities for one `(j, k)`, keyed by protocol id and outcome tuple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub j: usize,
    pub k: usize,
    pub protocols: BTreeMap<String, BTreeMap<String, f64>>,
}

impl From<&ProtocolDistributions> for ProbabilityTable {
    fn from(dists: &ProtocolDistributions) -> Self {
        let protocols = Protocol::ALL
            .iter()
            .map(|&p| (p.id().to_string(), dists.law(p).entries.iter().map(|(o, pr)| (outcome_key(o), *pr)).collect()))
            .collect();
        Self { j: dists.j, k: dists.k, protocols }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateJson {
    pub q: Vec<Vec<ComplexJson>>,
    pub nonpositivity: f64,
    pub re_half_width: Vec<Vec<f64>>,
    pub im_half_width: Vec<Vec<f64>>,
    pub nonpositivity_half_width: f64,
    pub confidence: f64,
}

impl From<&KdEstimate> for EstimateJson {
    fn from(e: &KdEstimate) -> Self {
        Self {
            q: matrix_to_json(e.q.matrix()),
            nonpositivity: e.q.nonpositivity(),
            re_half_width: real_rows(&e.re_half_width),
            im_half_width: real_rows(&e.im_half_width),
            nonpositivity_half_width: e.nonpositivity_half_width,
            confidence: e.confidence,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleReport {
    pub epsilon: f64,
    pub shots_per_cell: u64,
    pub seed: u64,
    pub generator: String,
    pub counts: Vec<CellCounts>,
    pub estimate: EstimateJson,
    pub exact: KdJson,
    /// Largest `|Q_hat - Q|` over entries.
    pub max_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome_log: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HvmReport {
    pub epsilon: f64,
    pub model: HiddenVariableModel,
    pub min_entry: f64,
    pub correctness: CorrectnessReport,
    pub noncontextuality: NoncontextualityReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HvmVerifyReport {
    pub epsilon: f64,
    pub min_entry: f64,
    pub correctness: CorrectnessReport,
    pub noncontextuality: NoncontextualityReport,
    pub passed: bool,
}

pub type CertifyReport = CertificationVerdict;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositiveStateJson {
    pub vector: Vec<ComplexJson>,
    pub provenance: Provenance,
    pub nonpositivity: f64,
}

impl From<&PositiveState> for PositiveStateJson {
    fn from(s: &PositiveState) -> Self {
        Self { vector: vector_to_json(&s.vector), provenance: s.provenance, nonpositivity: s.nonpositivity }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub seed: u64,
    pub count: usize,
    pub states: Vec<PositiveStateJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullJson {
    pub feasible: bool,
    pub weights: Vec<f64>,
    pub distance: f64,
    pub residual: f64,
    pub nearest: Vec<Vec<ComplexJson>>,
}

impl From<&HullMembership> for HullJson {
    fn from(h: &HullMembership) -> Self {
        Self { feasible: h.feasible, weights: h.weights.clone(), distance: h.distance, residual: h.residual, nearest: matrix_to_json(&h.nearest) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessJson {
    pub h: Vec<Vec<ComplexJson>>,
    pub c_hull: f64,
    pub c_star: f64,
    pub gap: f64,
    pub hull_argmax: usize,
}

impl From<&SeparatingWitness> for WitnessJson {
    fn from(w: &SeparatingWitness) -> Self {
        Self { h: matrix_to_json(&w.h), c_hull: w.c_hull, c_star: w.c_star, gap: w.gap, hull_argmax: w.hull_argmax }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FloorJson {
    pub delta: f64,
    pub state: Vec<ComplexJson>,
    pub restart: usize,
    pub restart_values: Vec<f64>,
    pub top_eigenvalue: f64,
}

impl From<&NegativityFloor> for FloorJson {
    fn from(f: &NegativityFloor) -> Self {
        Self { delta: f.delta, state: vector_to_json(&f.state), restart: f.restart, restart_values: f.restart_values.clone(), top_eigenvalue: f.top_eigenvalue }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryReport {
    pub seed: u64,
    pub generators: usize,
    pub nonpositivity: f64,
    pub kd_positive: bool,
    pub hull: HullJson,
    pub witness: Option<WitnessJson>,
    pub floor: Option<FloorJson>,
    pub exotic: bool,
    /// Hull membership and separation hold relative to the generator set
    /// used, not the full set of pure KD-positive states.
    pub caveat: String,
    /// `3 d^2 epsilon`, when a coupling was given.
    pub threshold: Option<f64>,
    /// `delta > 3 d^2 epsilon`
    pub floor_exceeds_threshold: Option<bool>,
}

impl GeometryReport {
    pub fn new(a: &ExoticAnalysis, seed: u64, threshold: Option<f64>) -> Self {
        Self {
            seed,
            generators: a.hull.weights.len(),
            nonpositivity: a.nonpositivity,
            kd_positive: a.kd_positive,
            hull: (&a.hull).into(),
            witness: a.witness.as_ref().map(Into::into),
            floor: a.floor.as_ref().map(Into::into),
            exotic: a.exotic,
            caveat: format!("hull computed over {} generators; a state outside it may still lie in the full KD-positive hull", a.hull.weights.len()),
            threshold,
            floor_exceeds_threshold: threshold.map(|t| a.floor.as_ref().is_some_and(|f| f.delta > t)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub generator: String,
    pub threads: usize,
    pub d: usize,
    pub states: usize,
    pub rounds: u64,
    pub deliveries: u64,
    pub epsilon: f64,
    /// Uniform mixture of Alice's states.
    pub mixture: Vec<Vec<ComplexJson>>,
    pub mixture_nonpositivity: f64,
    pub record: PathBuf,
    pub ledger: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalCellJson {
    pub protocol: u8,
    pub j: usize,
    pub k: usize,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    pub half_width: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HvmCheckJson {
    pub built: bool,
    pub error: Option<String>,
    pub correctness: Option<CorrectnessReport>,
    pub noncontextuality: Option<NoncontextualityReport>,
}

impl From<&Result<HvmCheck, kdcontext_core::Error>> for HvmCheckJson {
    fn from(r: &Result<HvmCheck, kdcontext_core::Error>) -> Self {
        match r {
            Ok(h) => Self { built: true, error: None, correctness: Some(h.correctness), noncontextuality: Some(h.noncontextuality) },
            Err(e) => Self { built: false, error: Some(e.to_string()), correctness: None, noncontextuality: None },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub verdict: BobVerdict,
    pub deliveries: u64,
    pub epsilon: f64,
    pub cells: Vec<EmpiricalCellJson>,
    pub estimate: EstimateJson,
    pub rho_hat: Vec<Vec<ComplexJson>>,
    pub nonpositivity: f64,
    pub noise_band: f64,
    pub threshold: f64,
    pub reconstruction_radius: f64,
    pub hvm: Option<HvmCheckJson>,
    pub geometry: Option<GeometryReport>,
}

impl AnalyzeReport {
    pub fn new(r: &BobReport, epsilon: f64, seed: u64) -> Self {
        Self {
            verdict: r.verdict,
            deliveries: r.deliveries,
            epsilon,
            cells: r
                .cells
                .iter()
                .map(|c| EmpiricalCellJson {
                    protocol: c.setting.protocol.id(),
                    j: c.setting.j,
                    k: c.setting.k,
                    counts: c.counts.clone(),
                    frequencies: c.frequencies.clone(),
                    half_width: c.half_width,
                })
                .collect(),
            estimate: (&r.estimate).into(),
            rho_hat: matrix_to_json(r.rho_hat.matrix()),
            nonpositivity: r.nonpositivity,
            noise_band: r.noise_band,
            threshold: r.threshold,
            reconstruction_radius: r.reconstruction_radius,
            hvm: r.hvm.as_ref().map(Into::into),
            geometry: r.geometry.as_ref().map(|g| GeometryReport::new(g, seed, Some(r.threshold))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateReportJson {
    pub index: usize,
    pub deliveries: u64,
    pub min_cell_count: u64,
    pub estimate: EstimateJson,
    pub rho_hat: Vec<Vec<ComplexJson>>,
    pub nonpositivity: f64,
    pub certification: CertificationVerdict,
    pub exceeds_with_margin: bool,
}

impl From<&StateReport> for StateReportJson {
    fn from(s: &StateReport) -> Self {
        Self {
            index: s.index,
            deliveries: s.deliveries,
            min_cell_count: s.min_cell_count,
            estimate: (&s.estimate).into(),
            rho_hat: matrix_to_json(s.rho_hat.matrix()),
            nonpositivity: s.nonpositivity,
            certification: s.certification.clone(),
            exceeds_with_margin: s.exceeds_with_margin,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PostselectReport {
    pub threshold: f64,
    pub any_contextual: bool,
    pub states: Vec<StateReportJson>,
}
