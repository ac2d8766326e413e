//! JSON shapes shared by configs and reports.
//!
//! A complex number is `[re, im]`, a vector is a list of complex numbers and a
//! matrix is a list of rows. Floats are written with round-trip precision.

use std::io::{BufRead, Write};

use anyhow::{anyhow, bail, ensure, Context, Result};
use kdcontext_core::linalg::{c, CMatrix, CVector};
use kdcontext_core::protocols::{CountTable, Outcome, OutcomeRecord, Setting, Sign};
use kdcontext_core::{BasisPair, BobPolicy, DensityMatrix, KdDistribution, PublicEntry, PublicRecord, PureState, SecretLedger};
use serde::{Deserialize, Serialize};

pub type ComplexJson = [f64; 2];

pub fn vector_to_json(v: &CVector) -> Vec<ComplexJson> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &[ComplexJson]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|z| c(z[0], z[1])))
}

pub fn matrix_to_json(m: &CMatrix) -> Vec<Vec<ComplexJson>> {
    m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_json(rows: &[Vec<ComplexJson>]) -> Result<CMatrix> {
    let n = rows.len();
    ensure!(n > 0, "matrix has no rows");
    let cols = rows[0].len();
    ensure!(rows.iter().all(|r| r.len() == cols), "matrix rows have different lengths");
    Ok(CMatrix::from_fn(n, cols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// A basis pair by preset name (`"qubit-mub"`, `"fourier:<d>"`) or as
/// explicit lists of vectors, `{"d": 2, "a_vectors": [...], "b_vectors": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    Preset(String),
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        a_vectors: Vec<Vec<ComplexJson>>,
        b_vectors: Vec<Vec<ComplexJson>>,
    },
}

impl BasisSpec {
    pub fn resolve(&self) -> Result<BasisPair> {
        match self {
            BasisSpec::Preset(name) => preset_basis(name),
            BasisSpec::Explicit { d, a_vectors, b_vectors } => {
                if let Some(d) = *d {
                    ensure!(a_vectors.len() == d && b_vectors.len() == d, "basis declares d = {d} but lists {} and {} vectors", a_vectors.len(), b_vectors.len());
                }
                let a = a_vectors.iter().map(|v| vector_from_json(v)).collect();
                let b = b_vectors.iter().map(|v| vector_from_json(v)).collect();
                Ok(BasisPair::new(a, b)?)
            }
        }
    }

    pub fn from_basis(basis: &BasisPair) -> Self {
        BasisSpec::Explicit {
            d: Some(basis.dim()),
            a_vectors: basis.a_vectors().iter().map(vector_to_json).collect(),
            b_vectors: basis.b_vectors().iter().map(vector_to_json).collect(),
        }
    }
}

fn preset_basis(name: &str) -> Result<BasisPair> {
    if name == "qubit-mub" {
        return Ok(BasisPair::qubit_mub());
    }
    if let Some(d) = name.strip_prefix("fourier:") {
        let d: usize = d.parse().with_context(|| format!("bad dimension in basis preset {name:?}"))?;
        ensure!(d >= 2, "fourier preset needs d >= 2");
        return Ok(BasisPair::fourier(d));
    }
    bail!("unknown basis preset {name:?} (expected \"qubit-mub\" or \"fourier:<d>\")")
}

/// A state as a pure vector `{"pure": [...]}`, a density matrix
/// `{"rho": [[...], ...]}`, or `"maximally-mixed"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Pure { pure: Vec<ComplexJson> },
    Density { rho: Vec<Vec<ComplexJson>> },
    Preset(String),
}

impl StateSpec {
    pub fn resolve(&self, d: usize) -> Result<DensityMatrix> {
        let rho = match self {
            StateSpec::Pure { .. } => DensityMatrix::from_pure(&self.resolve_pure()?),
            StateSpec::Density { rho } => DensityMatrix::new(matrix_from_json(rho)?)?,
            StateSpec::Preset(name) if name == "maximally-mixed" => DensityMatrix::maximally_mixed(d),
            StateSpec::Preset(name) => bail!("unknown state preset {name:?} (expected \"maximally-mixed\")"),
        };
        ensure!(rho.dim() == d, "state has dimension {} but the basis has {d}", rho.dim());
        Ok(rho)
    }

    pub fn resolve_pure(&self) -> Result<PureState> {
        match self {
            StateSpec::Pure { pure } => Ok(PureState::from_vector(vector_from_json(pure))?),
            _ => Err(anyhow!("expected a pure state {{\"pure\": [[re, im], ...]}}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdJson {
    pub q: Vec<Vec<ComplexJson>>,
    pub nonpositivity: f64,
}

impl From<&KdDistribution> for KdJson {
    fn from(q: &KdDistribution) -> Self {
        Self { q: matrix_to_json(q.matrix()), nonpositivity: q.nonpositivity() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCounts {
    pub protocol: u8,
    pub j: usize,
    pub k: usize,
    /// In canonical outcome order.
    pub counts: Vec<u64>,
}

pub fn counts_to_json(table: &CountTable) -> Vec<CellCounts> {
    table.cells().map(|(s, c)| CellCounts { protocol: s.protocol.id(), j: s.j, k: s.k, counts: c.to_vec() }).collect()
}

pub fn counts_from_json(d: usize, cells: &[CellCounts]) -> Result<CountTable> {
    let mut table = CountTable::new(d);
    for cell in cells {
        let p = kdcontext_core::Protocol::from_id(cell.protocol)?;
        table.add_counts(Setting::new(p, cell.j, cell.k), &cell.counts)?;
    }
    Ok(table)
}

/// One shot of `protocols sample`. Coordinates the protocol does not
/// produce are `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeLine {
    pub round: u64,
    /// 1 to 6.
    pub protocol: u8,
    pub j: usize,
    pub k: usize,
    pub x: Option<i8>,
    pub y: Option<i8>,
    pub z: Option<i8>,
    pub seed_cell: u64,
}

impl From<&OutcomeRecord> for OutcomeLine {
    fn from(r: &OutcomeRecord) -> Self {
        let v = |s: Option<Sign>| s.map(Sign::as_i8);
        Self {
            round: r.round,
            protocol: r.protocol.id(),
            j: r.j,
            k: r.k,
            x: v(r.outcome.x),
            y: v(r.outcome.y),
            z: v(r.outcome.z),
            seed_cell: r.seed_cell,
        }
    }
}

/// `"x=+1,z=-1"` style key for an outcome tuple.
pub fn outcome_key(o: &Outcome) -> String {
    [("x", o.x), ("y", o.y), ("z", o.z)]
        .iter()
        .filter_map(|(name, s)| s.map(|s| format!("{name}={:+}", s.as_i8())))
        .collect::<Vec<_>>()
        .join(",")
}

/// First line of a record file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub d: usize,
    pub states_per_round: usize,
    pub rounds: u64,
    pub epsilon: f64,
    pub policy: BobPolicy,
    pub entries: u64,
}

/// One delivery line of a record file. Unused outcome coordinates are 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordLine {
    pub round: u64,
    pub delivery: u64,
    pub protocol: u8,
    pub j: u8,
    pub k: u8,
    pub x: i8,
    pub y: i8,
    pub z: i8,
}

/// One line of a ledger file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerLine {
    pub round: u64,
    pub delivery: u64,
    pub state: u32,
}

pub fn write_record(record: &PublicRecord, out: &mut impl Write) -> Result<()> {
    let header = RecordHeader {
        d: record.d,
        states_per_round: record.states_per_round,
        rounds: record.rounds,
        epsilon: record.epsilon,
        policy: record.policy,
        entries: record.entries.len() as u64,
    };
    serde_json::to_writer(&mut *out, &header)?;
    out.write_all(b"\n")?;
    let n = record.states_per_round as u64;
    for (i, e) in record.entries.iter().enumerate() {
        let i = i as u64;
        let line = RecordLine { round: i / n, delivery: i % n, protocol: e.protocol, j: e.j, k: e.k, x: e.x, y: e.y, z: e.z };
        serde_json::to_writer(&mut *out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_record(input: impl BufRead) -> Result<PublicRecord> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| anyhow!("record file is empty"))??;
    let header: RecordHeader = serde_json::from_str(&first).context("record header")?;
    let n = header.states_per_round as u64;
    ensure!(n > 0, "record header has no states per round");
    let mut entries = Vec::with_capacity(header.entries as usize);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let l: RecordLine = serde_json::from_str(&line).with_context(|| format!("record line {}", i + 2))?;
        let index = entries.len() as u64;
        ensure!(l.round == index / n && l.delivery == index % n, "record line {} is out of order", i + 2);
        entries.push(PublicEntry { protocol: l.protocol, j: l.j, k: l.k, x: l.x, y: l.y, z: l.z });
    }
    ensure!(entries.len() as u64 == header.entries, "record header announces {} entries, found {}", header.entries, entries.len());
    Ok(PublicRecord { d: header.d, states_per_round: header.states_per_round, rounds: header.rounds, epsilon: header.epsilon, policy: header.policy, entries })
}

pub fn write_ledger(ledger: &SecretLedger, states_per_round: usize, out: &mut impl Write) -> Result<()> {
    let n = states_per_round as u64;
    for (i, &state) in ledger.states.iter().enumerate() {
        let i = i as u64;
        serde_json::to_writer(&mut *out, &LedgerLine { round: i / n, delivery: i % n, state })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_ledger(input: impl BufRead) -> Result<SecretLedger> {
    let mut states = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let l: LedgerLine = serde_json::from_str(&line).with_context(|| format!("ledger line {}", i + 1))?;
        states.push(l.state);
    }
    Ok(SecretLedger { states })
}
