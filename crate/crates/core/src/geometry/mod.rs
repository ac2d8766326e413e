//! Convex geometry of KD-positive states: the hull of pure KD-positive states,
//! separating witnesses, the negativity floor over a witness half-space, and
//! checks on pure decompositions.

mod decomposition;
mod exotic;
mod floor;
mod hull;
mod search;

pub use decomposition::{check_decomposition, random_decomposition, DecompositionReport, DECOMPOSITION_TOL};
pub use exotic::{analyze_candidate, ExoticAnalysis, ExoticConfig};
pub use floor::{negativity_floor, FloorConfig, NegativityFloor};
pub use hull::{find_witness, hull_membership, HullMembership, SeparatingWitness, DEFAULT_GAP_TOL, DEFAULT_HULL_TOL};
pub use search::{pure_positive_search, pure_positive_search_with, PositiveState, Provenance, PurePositiveSet, SearchConfig};
