//! Rayon versions of the sampling loops. Every cell, round and delivery draws
//! from its own derived stream, so results match the serial code bit for bit.

use anyhow::Result;
use kdcontext_core::experiment::ExperimentPlan;
use kdcontext_core::protocols::{all_distributions, cell_seed, sample_cell_counts, CountTable, Setting};
use kdcontext_core::{AliceConfig, BasisPair, BobPolicy, DensityMatrix, PublicEntry, PublicRecord, SecretLedger};
use rayon::prelude::*;

/// Rounds simulated per task.
const ROUND_BLOCK: u64 = 4096;

/// Runs `f` on a pool with `threads` workers, or on the current thread when
/// `threads` is 1. Zero means one worker per core.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(f))
}

pub fn run_experiment_parallel(alice: &AliceConfig, policy: &BobPolicy, master_seed: u64) -> Result<(PublicRecord, SecretLedger)> {
    let plan = ExperimentPlan::new(alice, policy, master_seed)?;
    let blocks: Vec<(Vec<PublicEntry>, Vec<u32>)> = (0..plan.rounds().div_ceil(ROUND_BLOCK))
        .into_par_iter()
        .map(|b| {
            let rounds = b * ROUND_BLOCK..((b + 1) * ROUND_BLOCK).min(plan.rounds());
            let mut entries = Vec::with_capacity(rounds.clone().count() * plan.states_per_round());
            let mut ledger = Vec::with_capacity(entries.capacity());
            for r in rounds {
                let (e, l) = plan.simulate_round(r);
                entries.extend(e);
                ledger.extend(l);
            }
            (entries, ledger)
        })
        .collect();
    Ok(plan.assemble(blocks))
}

pub fn simulate_counts_parallel(rho: &DensityMatrix, basis: &BasisPair, epsilon: f64, shots: u64, master_seed: u64) -> Result<CountTable> {
    let d = basis.dim();
    let dists = all_distributions(rho, basis, epsilon)?;
    let grid = Setting::grid(d);
    let cells: Vec<Vec<u64>> = grid
        .par_iter()
        .enumerate()
        .map(|(index, s)| sample_cell_counts(&dists[s.j * d + s.k], s.protocol, shots, cell_seed(master_seed, index)))
        .collect();
    let mut table = CountTable::new(d);
    for (s, c) in grid.iter().zip(&cells) {
        table.add_counts(*s, c)?;
    }
    Ok(table)
}
