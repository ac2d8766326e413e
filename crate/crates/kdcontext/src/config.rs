//! Per-command JSON configs. Unknown fields are rejected.

use std::path::PathBuf;

use kdcontext_core::geometry::{ExoticConfig, FloorConfig, SearchConfig, DEFAULT_GAP_TOL, DEFAULT_HULL_TOL};
use kdcontext_core::protocols::DEFAULT_CONFIDENCE;
use serde::{Deserialize, Serialize};

use crate::format::{BasisSpec, ComplexJson, StateSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdConfig {
    pub basis: BasisSpec,
    pub state: StateSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolsConfig {
    pub basis: BasisSpec,
    pub state: StateSpec,
    pub epsilon: f64,
    /// Shots per `(protocol, j, k)` cell; `protocols sample` only.
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// Also write every shot to a line-delimited log.
    #[serde(default)]
    pub log_outcomes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HvmConfig {
    pub basis: BasisSpec,
    pub state: StateSpec,
    pub epsilon: f64,
    #[serde(default = "default_kd_tol")]
    pub kd_tol: f64,
    /// `hvm verify` only: check a model saved by `hvm build` instead of
    /// building a fresh one.
    #[serde(default)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub basis: BasisSpec,
    pub state: StateSpec,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSettings {
    pub budget: usize,
    pub tol: f64,
    pub dedup_tol: f64,
    pub max_evals: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        let s = SearchConfig::default();
        Self { budget: s.budget, tol: s.tol, dedup_tol: s.dedup_tol, max_evals: s.nelder_mead.max_evals }
    }
}

impl SearchSettings {
    pub fn to_core(self) -> SearchConfig {
        let mut s = SearchConfig { budget: self.budget, tol: self.tol, dedup_tol: self.dedup_tol, ..SearchConfig::default() };
        s.nelder_mead.max_evals = self.max_evals;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySettings {
    pub kd_tol: f64,
    pub hull_tol: f64,
    pub gap_tol: f64,
    pub floor_restarts: usize,
    pub floor_penalty: f64,
}

impl Default for GeometrySettings {
    fn default() -> Self {
        let f = FloorConfig::default();
        Self { kd_tol: 1e-9, hull_tol: DEFAULT_HULL_TOL, gap_tol: DEFAULT_GAP_TOL, floor_restarts: f.restarts, floor_penalty: f.penalty }
    }
}

impl GeometrySettings {
    pub fn to_core(self) -> ExoticConfig {
        ExoticConfig {
            kd_tol: self.kd_tol,
            hull_tol: self.hull_tol,
            gap_tol: self.gap_tol,
            floor: FloorConfig { restarts: self.floor_restarts, penalty: self.floor_penalty, ..FloorConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub basis: BasisSpec,
    /// Target `rho*`; required by `witness` and `floor`.
    #[serde(default)]
    pub state: Option<StateSpec>,
    /// Compared against the floor when given.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub search: SearchSettings,
    /// Use these generators instead of searching.
    #[serde(default)]
    pub generators: Option<Vec<Vec<ComplexJson>>>,
    #[serde(default)]
    pub geometry: GeometrySettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicySpec {
    /// `"uniform"`: every grid cell equally likely.
    Named(String),
    /// Per-protocol weights, protocol 1 first.
    Weights([f64; 6]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub basis: BasisSpec,
    pub epsilon: f64,
    /// `experiment run`: Alice's pure states.
    #[serde(default)]
    pub states: Vec<StateSpec>,
    #[serde(default)]
    pub rounds: u64,
    #[serde(default)]
    pub policy: Option<PolicySpec>,
    /// Record file; written by `run`, read by `analyze` and `postselect`.
    #[serde(default)]
    pub record: Option<PathBuf>,
    /// Ledger file; written by `run`, read by `postselect`.
    #[serde(default)]
    pub ledger: Option<PathBuf>,
    #[serde(default = "default_min_samples")]
    pub min_samples: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default = "default_band_factor")]
    pub band_factor: f64,
    #[serde(default)]
    pub search: SearchSettings,
    #[serde(default)]
    pub geometry: GeometrySettings,
}

fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE
}

fn default_kd_tol() -> f64 {
    kdcontext_core::hvm::KD_POSITIVE_TOL
}

fn default_min_samples() -> u64 {
    1000
}

fn default_band_factor() -> f64 {
    3.0
}
