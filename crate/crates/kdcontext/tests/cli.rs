use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const PLUS_I: &str = r#"{"pure":[[0.7071067811865476,0],[0,0.7071067811865476]]}"#;
const MINUS_I: &str = r#"{"pure":[[0.7071067811865476,0],[0,-0.7071067811865476]]}"#;

fn kdctx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdctx")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn kd_compute_writes_nonpositivity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "kd.json", &format!(r#"{{"basis":"qubit-mub","state":{PLUS_I}}}"#));
    let out = dir.path().join("kd.out.json");
    let o = kdctx(&["kd", "compute", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert!((r["kd"]["nonpositivity"].as_f64().unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-12);
}

#[test]
fn report_goes_to_stdout_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &format!(r#"{{"basis":"qubit-mub","state":{PLUS_I},"epsilon":0.02}}"#));
    let o = kdctx(&["certify", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["verdict"], "Contextual");
    assert!((r["N"].as_f64().unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    assert!((r["threshold_3d2eps"].as_f64().unwrap() - 0.24).abs() < 1e-12);
    assert_eq!(r["epsilon"], 0.02);
    assert!(r["witness_margins"].is_object());
}

#[test]
fn exact_table_is_keyed_by_protocol_and_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", &format!(r#"{{"basis":"qubit-mub","state":{PLUS_I},"epsilon":0.2}}"#));
    let o = kdctx(&["protocols", "exact", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let tables = r["probabilities"].as_array().unwrap();
    assert_eq!(tables.len(), 4);
    let t = &tables[0]["protocols"];
    assert_eq!(t["2"].as_object().unwrap().len(), 4);
    assert_eq!(t["5"]["y=+1"], 0.5);
    let f1: f64 = t["1"].as_object().unwrap().values().map(|v| v.as_f64().unwrap()).sum();
    assert!((f1 - 1.0).abs() < 1e-12);
    assert!(t["3"]["y=-1,z=+1"].is_number());
}

#[test]
fn invalid_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&kdctx(&["kd", "compute", "--config", missing.to_str().unwrap()])), 2);

    let unknown = write(dir.path(), "u.json", r#"{"basis":"qubit-mub","state":"maximally-mixed","colour":1}"#);
    assert_eq!(code(&kdctx(&["kd", "compute", "--config", &unknown])), 2);

    let strong = write(dir.path(), "s.json", &format!(r#"{{"basis":"qubit-mub","state":{PLUS_I},"epsilon":2.0}}"#));
    assert_eq!(code(&kdctx(&["certify", "--config", &strong])), 2);

    // A KD-nonpositive state has no noncontextual model.
    let hvm = write(dir.path(), "h.json", &format!(r#"{{"basis":"qubit-mub","state":{PLUS_I},"epsilon":0.1}}"#));
    assert_eq!(code(&kdctx(&["hvm", "build", "--config", &hvm])), 2);

    assert_eq!(code(&kdctx(&["kd", "compute"])), 2);
    assert_eq!(code(&kdctx(&["frobnicate", "--config", &hvm])), 2);
}

#[test]
fn sparse_record_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "e.json", r#"{"basis":"qubit-mub","epsilon":0.05,"states":[{"pure":[[1,0],[0,0]]}],"rounds":40}"#);
    let out = dir.path().join("run.json");
    let out = out.to_str().unwrap();
    assert_eq!(code(&kdctx(&["experiment", "run", "--config", &cfg, "--out", out])), 0);
    let o = kdctx(&["experiment", "analyze", "--config", &cfg, "--out", out]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn hvm_build_then_verify_saved_model() {
    let dir = tempfile::tempdir().unwrap();
    let build = write(dir.path(), "b.json", r#"{"basis":"qubit-mub","state":{"pure":[[1,0],[0,0]]},"epsilon":0.3}"#);
    let model = dir.path().join("model.json");
    assert_eq!(code(&kdctx(&["hvm", "build", "--config", &build, "--out", model.to_str().unwrap()])), 0);
    let verify = write(dir.path(), "v.json", r#"{"basis":"qubit-mub","state":{"pure":[[1,0],[0,0]]},"epsilon":0.3,"model":"model.json"}"#);
    let o = kdctx(&["hvm", "verify", "--config", &verify]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["passed"], true);
}

#[test]
fn protocols_sample_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", &format!(r#"{{"basis":"qubit-mub","state":{PLUS_I},"epsilon":0.2,"shots":5000,"log_outcomes":true}}"#));
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(code(&kdctx(&["protocols", "sample", "--config", &cfg, "--seed", "4", "--out", a.to_str().unwrap()])), 0);
    assert_eq!(code(&kdctx(&["protocols", "sample", "--config", &cfg, "--seed", "4", "--threads", "3", "--out", b.to_str().unwrap()])), 0);
    let (ra, rb) = (report(&a), report(&b));
    assert_eq!(ra["counts"], rb["counts"]);
    assert_eq!(ra["estimate"], rb["estimate"]);
    let log = fs::read_to_string(dir.path().join("a.outcomes.ndjson")).unwrap();
    assert_eq!(log.lines().count(), 17 * 5000);
    let first: Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    assert_eq!(first["protocol"], 1);
    assert!(first["x"].is_null() && first["y"].is_null());
    assert!(first["z"] == 1 || first["z"] == -1);
    assert!(first["seed_cell"].is_u64());
    let weak: Value = serde_json::from_str(log.lines().nth(4 * 5000).unwrap()).unwrap();
    assert_eq!(weak["protocol"], 2);
    assert!(weak["x"].is_i64() && weak["y"].is_null() && weak["z"].is_i64());
}

#[test]
fn run_analyze_postselect_flow() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.json",
        &format!(
            r#"{{"basis":"qubit-mub","epsilon":0.02,"states":[{PLUS_I},{MINUS_I}],"rounds":60000,
                "policy":[0.02,0.46,0.46,0.02,0.01,0.03],"record":"r.ndjson","ledger":"l.ndjson"}}"#
        ),
    );
    let run = dir.path().join("run.json");
    let o = kdctx(&["experiment", "run", "--config", &cfg, "--seed", "8", "--out", run.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&run)["deliveries"], 120_000);
    let record = fs::read(dir.path().join("r.ndjson")).unwrap();

    let o = kdctx(&["experiment", "run", "--config", &cfg, "--seed", "8", "--threads", "4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(dir.path().join("r.ndjson")).unwrap(), record);

    // The pooled state is I/2; nothing contextual shows in Bob's data.
    let o = kdctx(&["experiment", "analyze", "--config", &cfg, "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_ne!(r["verdict"], "BobDataContextual");

    let o = kdctx(&["experiment", "postselect", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["any_contextual"], true);
    for s in r["states"].as_array().unwrap() {
        assert!((s["nonpositivity"].as_f64().unwrap() - (2f64.sqrt() - 1.0)).abs() < 0.15);
    }
}

#[test]
fn geometry_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.json", r#"{"basis":"fourier:3","state":"maximally-mixed","epsilon":0.001,"search":{"budget":30}}"#);
    for action in ["search", "witness", "floor"] {
        let o = kdctx(&["geometry", action, "--config", &cfg, "--seed", "2"]);
        assert_eq!(code(&o), 0, "{action}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = kdctx(&["geometry", "witness", "--config", &cfg, "--seed", "2"]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["hull"]["feasible"], true);
    assert_eq!(r["exotic"], false);

    let no_state = write(dir.path(), "n.json", r#"{"basis":"fourier:3"}"#);
    assert_eq!(code(&kdctx(&["geometry", "floor", "--config", &no_state])), 2);
}
