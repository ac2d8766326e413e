//! The `kdctx` command line.
//!
//! Every command reads a JSON config (`--config`), takes a master seed
//! (`--seed`) and writes a JSON report to `--out` or stdout. Exit codes: 0 on
//! success, 2 on invalid input, 3 when the data are too sparse to analyze.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kdcontext_core::geometry::{analyze_candidate, pure_positive_search_with, PurePositiveSet, Provenance};
use kdcontext_core::hvm::build_hvm_with_tolerance;
use kdcontext_core::linalg::max_abs_diff;
use kdcontext_core::protocols::{all_distributions, cell_seed, sample_cell_records, simulate_counts, Setting};
use kdcontext_core::rng::GENERATOR;
use kdcontext_core::{
    alice_postselect, bob_analyze, certify, kd_distribution, marginalization_check, run_experiment, AliceConfig, AnalysisConfig, BasisPair,
    BobPolicy, DensityMatrix, HiddenVariableModel, WeakMeasurementConfig,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::{CertifyConfig, ExperimentConfig, GeometryConfig, HvmConfig, KdConfig, PolicySpec, ProtocolsConfig};
use crate::format::{counts_to_json, OutcomeLine, matrix_to_json, read_ledger, read_record, vector_from_json, write_ledger, write_record};
use crate::parallel::{run_experiment_parallel, simulate_counts_parallel, with_threads};
use crate::report::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INSUFFICIENT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "kdctx", version, about = "Kirkwood-Dirac quasiprobabilities and contextuality certification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON config for the command.
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed for every random stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sampling (0 = one per core). Results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// KD distribution, weak values and nonpositivity.
    Kd {
        #[command(subcommand)]
        action: KdAction,
    },
    /// Exact or sampled statistics of the six protocols.
    Protocols {
        #[command(subcommand)]
        action: ProtocolsAction,
    },
    /// Noncontextual model for a KD-positive state.
    Hvm {
        #[command(subcommand)]
        action: HvmAction,
    },
    /// Contextuality verdict for a state and coupling.
    Certify(Common),
    /// Pure KD-positive states, hull witnesses and negativity floors.
    Geometry {
        #[command(subcommand)]
        action: GeometryAction,
    },
    /// The two-party delivery experiment.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum KdAction {
    Compute(Common),
}

#[derive(Debug, Subcommand)]
pub enum ProtocolsAction {
    Exact(Common),
    Sample(Common),
}

#[derive(Debug, Subcommand)]
pub enum HvmAction {
    Build(Common),
    Verify(Common),
}

#[derive(Debug, Subcommand)]
pub enum GeometryAction {
    Search(Common),
    Witness(Common),
    Floor(Common),
}

#[derive(Debug, Subcommand)]
pub enum ExperimentAction {
    Run(Common),
    Analyze(Common),
    Postselect(Common),
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &anyhow::Error) -> i32 {
    let insufficient = e.chain().any(|c| c.downcast_ref::<kdcontext_core::Error>().is_some_and(kdcontext_core::Error::is_insufficient_data));
    if insufficient {
        EXIT_INSUFFICIENT_DATA
    } else {
        EXIT_INVALID
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Kd { action: KdAction::Compute(c) } => kd_compute(&c),
        Command::Protocols { action: ProtocolsAction::Exact(c) } => protocols_exact(&c),
        Command::Protocols { action: ProtocolsAction::Sample(c) } => protocols_sample(&c),
        Command::Hvm { action: HvmAction::Build(c) } => hvm_build(&c),
        Command::Hvm { action: HvmAction::Verify(c) } => hvm_verify(&c),
        Command::Certify(c) => certify_cmd(&c),
        Command::Geometry { action: GeometryAction::Search(c) } => geometry_search(&c),
        Command::Geometry { action: GeometryAction::Witness(c) } => geometry_analyze(&c, false),
        Command::Geometry { action: GeometryAction::Floor(c) } => geometry_analyze(&c, true),
        Command::Experiment { action: ExperimentAction::Run(c) } => experiment_run(&c),
        Command::Experiment { action: ExperimentAction::Analyze(c) } => experiment_analyze(&c),
        Command::Experiment { action: ExperimentAction::Postselect(c) } => experiment_postselect(&c),
    }
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("cannot open config {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file)).with_context(|| format!("invalid config {}", path.display()))
}

/// Config-relative paths are resolved against the config's directory.
fn relative_to(config: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.parent().unwrap_or(Path::new(".")).join(p)
    }
}

fn emit<T: Serialize>(common: &Common, report: &T) -> Result<()> {
    match &common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
            serde_json::to_writer_pretty(&mut w, report)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            serde_json::to_writer_pretty(&mut w, report)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// `--out` with its extension replaced, for side files.
fn side_path(common: &Common, suffix: &str) -> Option<PathBuf> {
    common.out.as_ref().map(|o| o.with_extension(suffix))
}

fn kd_compute(c: &Common) -> Result<()> {
    let cfg: KdConfig = load(&c.config)?;
    let basis = cfg.basis.resolve()?;
    let rho = cfg.state.resolve(basis.dim())?;
    emit(c, &KdReport::new(&kd_distribution(&rho, &basis)?))
}

fn protocols_exact(c: &Common) -> Result<()> {
    let cfg: ProtocolsConfig = load(&c.config)?;
    let basis = cfg.basis.resolve()?;
    let rho = cfg.state.resolve(basis.dim())?;
    let wm = WeakMeasurementConfig::new(cfg.epsilon)?;
    let cells = all_distributions(&rho, &basis, cfg.epsilon)?;
    let marginalization = cells.iter().map(marginalization_check).collect();
    let probabilities = cells.iter().map(Into::into).collect();
    emit(c, &ExactReport { epsilon: cfg.epsilon, p_m: wm.p_m, p_d: wm.p_d, probabilities, cells, marginalization })
}

fn protocols_sample(c: &Common) -> Result<()> {
    let cfg: ProtocolsConfig = load(&c.config)?;
    let basis = cfg.basis.resolve()?;
    let rho = cfg.state.resolve(basis.dim())?;
    let shots = cfg.shots.ok_or_else(|| anyhow!("`protocols sample` needs `shots` in the config"))?;
    let counts = if c.threads == 1 {
        simulate_counts(&rho, &basis, cfg.epsilon, |_| shots, c.seed)?
    } else {
        with_threads(c.threads, || simulate_counts_parallel(&rho, &basis, cfg.epsilon, shots, c.seed))??
    };
    let outcome_log = if cfg.log_outcomes { Some(write_outcome_log(c, &rho, &basis, cfg.epsilon, shots)?) } else { None };
    let estimate = kdcontext_core::protocols::estimate_kd_with_confidence(&counts, &basis, cfg.epsilon, cfg.confidence)?;
    let exact = kd_distribution(&rho, &basis)?;
    emit(
        c,
        &SampleReport {
            epsilon: cfg.epsilon,
            shots_per_cell: shots,
            seed: c.seed,
            generator: GENERATOR.into(),
            counts: counts_to_json(&counts),
            max_error: max_abs_diff(estimate.q.matrix(), exact.matrix()),
            estimate: (&estimate).into(),
            exact: (&exact).into(),
            outcome_log,
        },
    )
}

/// One line per shot, in grid order; the same draws as the counts.
fn write_outcome_log(c: &Common, rho: &DensityMatrix, basis: &BasisPair, epsilon: f64, shots: u64) -> Result<PathBuf> {
    let path = side_path(c, "outcomes.ndjson").ok_or_else(|| anyhow!("`log_outcomes` needs --out"))?;
    let d = basis.dim();
    let dists = all_distributions(rho, basis, epsilon)?;
    let mut w = BufWriter::new(File::create(&path)?);
    for (index, s) in Setting::grid(d).iter().enumerate() {
        for rec in sample_cell_records(&dists[s.j * d + s.k], s.protocol, shots, cell_seed(c.seed, index)) {
            serde_json::to_writer(&mut w, &OutcomeLine::from(&rec))?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(path)
}

fn hvm_build(c: &Common) -> Result<()> {
    let cfg: HvmConfig = load(&c.config)?;
    let basis = cfg.basis.resolve()?;
    let rho = cfg.state.resolve(basis.dim())?;
    let model = build_hvm_with_tolerance(&rho, &basis, cfg.epsilon, cfg.kd_tol)?;
    let correctness = kdcontext_core::verify_correctness(&model, &rho, &basis, cfg.epsilon)?;
    let noncontextuality = kdcontext_core::verify_noncontextuality(&model);
    emit(c, &HvmReport { epsilon: cfg.epsilon, min_entry: model.min_entry(), model, correctness, noncontextuality })
}

fn hvm_verify(c: &Common) -> Result<()> {
    let cfg: HvmConfig = load(&c.config)?;
    let basis = cfg.basis.resolve()?;
    let rho = cfg.state.resolve(basis.dim())?;
    let model: HiddenVariableModel = match &cfg.model {
        Some(p) => {
            let report: HvmReport = load(&relative_to(&c.config, p))?;
            report.model
        }
        None => build_hvm_with_tolerance(&rho, &basis, cfg.epsilon, cfg.kd_tol)?,
    };
    let correctness = kdcontext_core::verify_correctness(&model, &rho, &basis, cfg.epsilon)?;
    let noncontextuality = kdcontext_core::verify_noncontextuality(&model);
    let passed = correctness.passed && noncontextuality.passed;
    emit(c, &HvmVerifyReport { epsilon: cfg.epsilon, min_entry: model.min_entry(), correctness, noncontextuality, passed })
}

fn certify_cmd(c: &Common) -> Result<()> {
    let cfg: CertifyConfig = load(&c.config)?;
    let basis = cfg.basis.resolve()?;
    let rho = cfg.state.resolve(basis.dim())?;
    emit(c, &certify(&rho, &basis, cfg.epsilon)?)
}

fn generator_set(cfg: &GeometryConfig, basis: &BasisPair, seed: u64) -> Result<PurePositiveSet> {
    match &cfg.generators {
        Some(list) => {
            let mut set = PurePositiveSet { basis: basis.clone(), tol: cfg.search.tol, states: Vec::new() };
            for (i, v) in list.iter().enumerate() {
                let v = vector_from_json(v);
                if v.len() != basis.dim() {
                    bail!("generator {i} has dimension {} but the basis has {}", v.len(), basis.dim());
                }
                let psi = kdcontext_core::PureState::normalized(v)?;
                set.insert(psi.into_vector(), Provenance::Search(i), 0.0);
            }
            Ok(set)
        }
        None => Ok(pure_positive_search_with(basis, &cfg.search.to_core(), seed)),
    }
}

fn geometry_search(c: &Common) -> Result<()> {
    let cfg: GeometryConfig = load(&c.config)?;
    let basis = cfg.basis.resolve()?;
    let set = generator_set(&cfg, &basis, c.seed)?;
    emit(c, &SearchReport { seed: c.seed, count: set.len(), states: set.states.iter().map(Into::into).collect() })
}

fn geometry_analyze(c: &Common, with_floor: bool) -> Result<()> {
    let cfg: GeometryConfig = load(&c.config)?;
    let basis = cfg.basis.resolve()?;
    let state = cfg.state.as_ref().ok_or_else(|| anyhow!("geometry witness/floor need `state` in the config"))?;
    let rho = state.resolve(basis.dim())?;
    let set = generator_set(&cfg, &basis, c.seed)?;
    let mut config = cfg.geometry.to_core();
    if !with_floor {
        config.floor.restarts = 1;
    }
    let analysis = analyze_candidate(&rho, &set, &config, c.seed)?;
    let threshold = match cfg.epsilon {
        Some(eps) => {
            WeakMeasurementConfig::new(eps)?;
            Some(3.0 * (basis.dim() * basis.dim()) as f64 * eps)
        }
        None => None,
    };
    let mut report = GeometryReport::new(&analysis, c.seed, threshold);
    if !with_floor {
        report.floor = None;
        report.floor_exceeds_threshold = None;
    }
    emit(c, &report)
}

fn policy(spec: &Option<PolicySpec>, d: usize) -> Result<BobPolicy> {
    match spec {
        None => Ok(BobPolicy::uniform(d)),
        Some(PolicySpec::Named(n)) if n == "uniform" => Ok(BobPolicy::uniform(d)),
        Some(PolicySpec::Named(n)) => bail!("unknown policy {n:?} (expected \"uniform\" or six weights)"),
        Some(PolicySpec::Weights(w)) => Ok(BobPolicy::new(*w)?),
    }
}

fn record_path(c: &Common, cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.record
        .as_ref()
        .map(|p| relative_to(&c.config, p))
        .or_else(|| side_path(c, "record.ndjson"))
        .ok_or_else(|| anyhow!("set `record` in the config or pass --out"))
}

fn ledger_path(c: &Common, cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.ledger
        .as_ref()
        .map(|p| relative_to(&c.config, p))
        .or_else(|| side_path(c, "ledger.ndjson"))
        .ok_or_else(|| anyhow!("set `ledger` in the config or pass --out"))
}

fn experiment_run(c: &Common) -> Result<()> {
    let cfg: ExperimentConfig = load(&c.config)?;
    let basis = cfg.basis.resolve()?;
    let states = cfg.states.iter().map(|s| s.resolve_pure()).collect::<Result<Vec<_>>>()?;
    let alice = AliceConfig::new(states, cfg.rounds, basis.clone(), cfg.epsilon)?;
    let policy = policy(&cfg.policy, basis.dim())?;
    let (record, ledger) = if c.threads == 1 {
        run_experiment(&alice, &policy, c.seed)?
    } else {
        with_threads(c.threads, || run_experiment_parallel(&alice, &policy, c.seed))??
    };
    let record_file = record_path(c, &cfg)?;
    let ledger_file = ledger_path(c, &cfg)?;
    let mut w = BufWriter::new(File::create(&record_file).with_context(|| format!("cannot create {}", record_file.display()))?);
    write_record(&record, &mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(&ledger_file).with_context(|| format!("cannot create {}", ledger_file.display()))?);
    write_ledger(&ledger, record.states_per_round, &mut w)?;
    w.flush()?;
    emit(
        c,
        &RunReport {
            seed: c.seed,
            generator: GENERATOR.into(),
            threads: c.threads,
            d: basis.dim(),
            states: alice.states.len(),
            rounds: alice.rounds,
            deliveries: record.entries.len() as u64,
            epsilon: cfg.epsilon,
            mixture: matrix_to_json(alice.mixture().matrix()),
            mixture_nonpositivity: kd_distribution(alice.mixture(), &basis)?.nonpositivity(),
            record: record_file,
            ledger: ledger_file,
        },
    )
}

fn load_record(c: &Common, cfg: &ExperimentConfig) -> Result<kdcontext_core::PublicRecord> {
    let path = record_path(c, cfg)?;
    let record = read_record(BufReader::new(File::open(&path).with_context(|| format!("cannot open record {}", path.display()))?))?;
    if (record.epsilon - cfg.epsilon).abs() > 0.0 {
        bail!("record was taken at epsilon = {} but the config says {}", record.epsilon, cfg.epsilon);
    }
    Ok(record)
}

fn experiment_analyze(c: &Common) -> Result<()> {
    let cfg: ExperimentConfig = load(&c.config)?;
    let basis = cfg.basis.resolve()?;
    let record = load_record(c, &cfg)?;
    let config = AnalysisConfig {
        min_samples: cfg.min_samples,
        confidence: cfg.confidence,
        band_factor: cfg.band_factor,
        search: cfg.search.to_core(),
        exotic: cfg.geometry.to_core(),
        seed: c.seed,
    };
    let report = bob_analyze(&record, &basis, &config)?;
    emit(c, &AnalyzeReport::new(&report, record.epsilon, c.seed))
}

fn experiment_postselect(c: &Common) -> Result<()> {
    let cfg: ExperimentConfig = load(&c.config)?;
    let basis = cfg.basis.resolve()?;
    let record = load_record(c, &cfg)?;
    let path = ledger_path(c, &cfg)?;
    let ledger = read_ledger(BufReader::new(File::open(&path).with_context(|| format!("cannot open ledger {}", path.display()))?))?;
    let report = alice_postselect(&record, &ledger, &basis, cfg.confidence)?;
    emit(
        c,
        &PostselectReport { threshold: report.threshold, any_contextual: report.any_contextual(), states: report.states.iter().map(Into::into).collect() },
    )
}
