//! The six measurement protocols: Kraus algebra, exact outcome laws,
//! Monte Carlo sampling, and the estimator that turns counts back into a KD
//! distribution.

mod estimate;
mod exact;
mod kraus;
mod outcome;
mod sampling;

pub use estimate::{
    estimate_kd, estimate_kd_from_frequencies, estimate_kd_with_confidence, CountTable, Frequencies, KdEstimate, DEFAULT_CONFIDENCE,
};
pub use exact::{exact_distributions, marginalization_check, MarginalizationReport, ProtocolDistributions};
pub use kraus::{kraus_operators, KrausPair, WeakMeasurementConfig};
pub use outcome::{Outcome, OutcomeLaw, Protocol, Setting, Sign};
pub use sampling::{
    all_distributions, cell_seed, sample_cell_counts, sample_cell_records, sample_protocol, sample_protocol_with, simulate_counts,
    OutcomeRecord,
};
