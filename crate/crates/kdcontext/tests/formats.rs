use std::io::Cursor;

use kdcontext::config::{ExperimentConfig, PolicySpec};
use kdcontext::format::*;
use kdcontext::parallel::{run_experiment_parallel, simulate_counts_parallel, with_threads};
use kdcontext_core::linalg::{c, max_abs_diff};
use kdcontext_core::protocols::simulate_counts;
use kdcontext_core::{run_experiment, AliceConfig, BasisPair, BobPolicy, DensityMatrix, PureState};

fn plus_i() -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_vector(kdcontext_core::linalg::CVector::from_vec(vec![c(h, 0.0), c(0.0, h)])).unwrap()
}

fn small_run() -> (kdcontext_core::PublicRecord, kdcontext_core::SecretLedger) {
    let zero = PureState::from_vector(kdcontext_core::linalg::CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
    let alice = AliceConfig::new(vec![plus_i(), zero], 3000, BasisPair::qubit_mub(), 0.05).unwrap();
    run_experiment(&alice, &BobPolicy::uniform(2), 11).unwrap()
}

#[test]
fn basis_spec_round_trips() {
    let basis = BasisPair::fourier(3);
    let json = serde_json::to_string(&BasisSpec::from_basis(&basis)).unwrap();
    let back: BasisSpec = serde_json::from_str(&json).unwrap();
    let back = back.resolve().unwrap();
    for (u, v) in basis.a_vectors().iter().zip(back.a_vectors()) {
        assert_eq!(u, v);
    }
    for (u, v) in basis.b_vectors().iter().zip(back.b_vectors()) {
        assert_eq!(u, v);
    }
}

#[test]
fn explicit_basis_json_shape() {
    let json = r#"{"d": 2, "a_vectors": [[[1,0],[0,0]], [[0,0],[1,0]]],
                   "b_vectors": [[[0.7071067811865476,0],[0.7071067811865476,0]], [[0.7071067811865476,0],[-0.7071067811865476,0]]]}"#;
    let spec: BasisSpec = serde_json::from_str(json).unwrap();
    assert_eq!(spec.resolve().unwrap().dim(), 2);
    let wrong_d = json.replacen("\"d\": 2", "\"d\": 3", 1);
    assert!(serde_json::from_str::<BasisSpec>(&wrong_d).unwrap().resolve().is_err());
    let value = serde_json::to_value(BasisSpec::from_basis(&BasisPair::qubit_mub())).unwrap();
    assert_eq!(value["d"], 2);
    assert_eq!(value["a_vectors"].as_array().unwrap().len(), 2);
}

#[test]
fn presets_resolve() {
    let spec: BasisSpec = serde_json::from_str("\"fourier:4\"").unwrap();
    assert_eq!(spec.resolve().unwrap().dim(), 4);
    let spec: BasisSpec = serde_json::from_str("\"qubit-mub\"").unwrap();
    assert_eq!(spec.resolve().unwrap().dim(), 2);
    assert!(serde_json::from_str::<BasisSpec>("\"fourier:1\"").unwrap().resolve().is_err());
    assert!(serde_json::from_str::<BasisSpec>("\"bogus\"").unwrap().resolve().is_err());

    let mixed: StateSpec = serde_json::from_str("\"maximally-mixed\"").unwrap();
    let rho = mixed.resolve(3).unwrap();
    assert!(max_abs_diff(rho.matrix(), DensityMatrix::maximally_mixed(3).matrix()) < 1e-15);
    let pure: StateSpec = serde_json::from_str("{\"pure\": [[1, 0], [0, 0]]}").unwrap();
    assert!(pure.resolve(3).is_err());
    assert!(mixed.resolve_pure().is_err());
}

#[test]
fn density_spec_round_trips() {
    let rho = DensityMatrix::from_pure(&plus_i());
    let spec = StateSpec::Density { rho: matrix_to_json(rho.matrix()) };
    let json = serde_json::to_string(&spec).unwrap();
    let back: StateSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back.resolve(2).unwrap().matrix(), rho.matrix());
}

#[test]
fn record_and_ledger_round_trip() {
    let (record, ledger) = small_run();
    let mut buf = Vec::new();
    write_record(&record, &mut buf).unwrap();
    let back = read_record(Cursor::new(&buf)).unwrap();
    assert_eq!(back, record);

    let mut buf = Vec::new();
    write_ledger(&ledger, record.states_per_round, &mut buf).unwrap();
    assert_eq!(read_ledger(Cursor::new(&buf)).unwrap(), ledger);
}

#[test]
fn reordered_record_is_rejected() {
    let (record, _) = small_run();
    let mut buf = Vec::new();
    write_record(&record, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(1, 2);
    assert!(read_record(Cursor::new(lines.join("\n"))).is_err());
    lines.swap(1, 2);
    lines.pop();
    assert!(read_record(Cursor::new(lines.join("\n"))).is_err());
}

#[test]
fn counts_round_trip() {
    let rho = DensityMatrix::from_pure(&plus_i());
    let basis = BasisPair::qubit_mub();
    let table = simulate_counts(&rho, &basis, 0.1, |_| 500, 2).unwrap();
    let json = serde_json::to_string(&counts_to_json(&table)).unwrap();
    let cells: Vec<CellCounts> = serde_json::from_str(&json).unwrap();
    assert_eq!(counts_from_json(2, &cells).unwrap(), table);
}

#[test]
fn parallel_experiment_matches_serial() {
    let alice = AliceConfig::new(vec![plus_i()], 10_000, BasisPair::qubit_mub(), 0.05).unwrap();
    let policy = BobPolicy::uniform(2);
    let serial = run_experiment(&alice, &policy, 99).unwrap();
    for threads in [2, 3, 0] {
        let par = with_threads(threads, || run_experiment_parallel(&alice, &policy, 99)).unwrap().unwrap();
        assert_eq!(par, serial, "threads = {threads}");
    }
}

#[test]
fn parallel_counts_match_serial() {
    let basis = BasisPair::fourier(3);
    let rho = DensityMatrix::maximally_mixed(3);
    let serial = simulate_counts(&rho, &basis, 0.1, |_| 2000, 5).unwrap();
    let par = with_threads(4, || simulate_counts_parallel(&rho, &basis, 0.1, 2000, 5)).unwrap().unwrap();
    assert_eq!(par, serial);
}

#[test]
fn experiment_config_defaults_and_unknown_fields() {
    let cfg: ExperimentConfig = serde_json::from_str(r#"{"basis":"qubit-mub","epsilon":0.1,"policy":"uniform"}"#).unwrap();
    assert_eq!(cfg.min_samples, 1000);
    assert_eq!(cfg.confidence, 0.99);
    assert_eq!(cfg.band_factor, 3.0);
    assert_eq!(cfg.policy, Some(PolicySpec::Named("uniform".into())));
    let weights: ExperimentConfig = serde_json::from_str(r#"{"basis":"qubit-mub","epsilon":0.1,"policy":[1,1,1,1,1,1]}"#).unwrap();
    assert_eq!(weights.policy, Some(PolicySpec::Weights([1.0; 6])));
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"basis":"qubit-mub","epsilon":0.1,"shots":5}"#).is_err());
}
