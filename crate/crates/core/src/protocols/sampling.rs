use alloc::vec::Vec;

use rand::Rng;

use crate::basis::BasisPair;
use crate::error::Result;
use crate::protocols::estimate::CountTable;
use crate::protocols::exact::{exact_distributions, ProtocolDistributions};
use crate::protocols::{Outcome, Protocol, Setting};
use crate::rng::{self, domain};
use crate::state::DensityMatrix;

/// One line of the outcome log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OutcomeRecord {
    pub round: u64,
    pub protocol: Protocol,
    pub j: usize,
    pub k: usize,
    pub outcome: Outcome,
    pub seed_cell: u64,
}

/// One outcome from the exact law, using a fresh stream seeded by `seed`.
pub fn sample_protocol(dists: &ProtocolDistributions, protocol: Protocol, seed: u64) -> Outcome {
    sample_protocol_with(dists, protocol, &mut rng::stream(seed))
}

/// One outcome by inverse CDF on a single uniform draw from `rng`.
pub fn sample_protocol_with<R: Rng + ?Sized>(dists: &ProtocolDistributions, protocol: Protocol, rng: &mut R) -> Outcome {
    dists.law(protocol).invert(rng.random::<f64>())
}

/// Outcome counts of `shots` draws, indexed like `protocol.outcomes()`.
pub fn sample_cell_counts(dists: &ProtocolDistributions, protocol: Protocol, shots: u64, seed: u64) -> Vec<u64> {
    let law = dists.law(protocol);
    let mut counts = alloc::vec![0u64; law.entries.len()];
    let mut rng = rng::stream(seed);
    for _ in 0..shots {
        let o = law.invert(rng.random::<f64>());
        counts[o.index_in(protocol).expect("law outcomes fit their protocol")] += 1;
    }
    counts
}

/// The individual draws behind [`sample_cell_counts`], in order.
pub fn sample_cell_records(dists: &ProtocolDistributions, protocol: Protocol, shots: u64, seed_cell: u64) -> Vec<OutcomeRecord> {
    let law = dists.law(protocol);
    let setting = Setting::new(protocol, dists.j, dists.k);
    let mut rng = rng::stream(seed_cell);
    (0..shots)
        .map(|round| OutcomeRecord {
            round,
            protocol,
            j: setting.j,
            k: setting.k,
            outcome: law.invert(rng.random::<f64>()),
            seed_cell,
        })
        .collect()
}

/// Exact laws for every `(j, k)`, row-major in `j`.
pub fn all_distributions(rho: &DensityMatrix, basis: &BasisPair, epsilon: f64) -> Result<Vec<ProtocolDistributions>> {
    let d = basis.dim();
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            out.push(exact_distributions(rho, basis, j, k, epsilon)?);
        }
    }
    Ok(out)
}

/// Seed of grid cell `index` (position in `Setting::grid(d)`).
pub fn cell_seed(master: u64, index: usize) -> u64 {
    rng::derive_seed(master, domain::PROTOCOL_CELL, index as u64)
}

/// Samples every cell of `Setting::grid(d)` with `shots(setting)` draws. Each
/// cell uses its own derived stream, so the result does not depend on the
/// order cells are visited in.
pub fn simulate_counts(
    rho: &DensityMatrix,
    basis: &BasisPair,
    epsilon: f64,
    shots: impl Fn(&Setting) -> u64,
    master_seed: u64,
) -> Result<CountTable> {
    let d = basis.dim();
    let dists = all_distributions(rho, basis, epsilon)?;
    let mut table = CountTable::new(d);
    for (index, setting) in Setting::grid(d).into_iter().enumerate() {
        let f = &dists[setting.j * d + setting.k];
        let counts = sample_cell_counts(f, setting.protocol, shots(&setting), cell_seed(master_seed, index));
        table.add_counts(setting, &counts)?;
    }
    Ok(table)
}
