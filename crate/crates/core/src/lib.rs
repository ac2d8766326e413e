//! Kirkwood-Dirac quasiprobabilities and generalized contextuality.
//!
//! This crate is the pure numerical core: it computes KD distributions over a
//! pair of orthonormal bases, the exact and sampled statistics of the six
//! weak-measurement protocols that estimate them, an explicit noncontextual
//! hidden-variable model for KD-positive states, contextuality certification
//! from KD nonpositivity, the convex geometry of pure KD-positive states, and
//! the two-party delivery experiment built on all of the above.
//!
//! Everything here is `no_std` with `alloc`. File formats, logs and the CLI
//! live in the `kdcontext` crate.
//!
//! ```
//! use kdcontext_core::{BasisPair, DensityMatrix, PureState, kd_distribution};
//! use num_complex::Complex64;
//!
//! let basis = BasisPair::qubit_mub();
//! let s = core::f64::consts::FRAC_1_SQRT_2;
//! let psi = PureState::new(vec![Complex64::new(s, 0.0), Complex64::new(0.0, s)]).unwrap();
//! let q = kd_distribution(&DensityMatrix::from_pure(&psi), &basis).unwrap();
//! assert!((q.nonpositivity() - (2f64.sqrt() - 1.0)).abs() < 1e-12);
//! ```

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basis;
pub mod certify;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod hvm;
pub mod kd;
pub mod linalg;
pub mod optim;
pub mod protocols;
pub mod rng;
pub mod state;

pub use basis::BasisPair;
pub use certify::{certify, hvm_cap_violation, lemma_thresholds, CertificationVerdict, Verdict};
pub use error::{Error, Result};
pub use experiment::{
    alice_postselect, bob_analyze, run_experiment, AliceConfig, AnalysisConfig, BobPolicy, BobReport, BobVerdict, PostselectionReport, PublicEntry,
    PublicRecord, SecretLedger,
};
pub use hvm::{build_hvm, hvm_predict, verify_correctness, verify_noncontextuality, HiddenVariableModel};
pub use kd::{kd_distribution, nonpositivity, reconstruct_state, weak_values, KdDistribution, WeakValues};
pub use protocols::{
    estimate_kd, exact_distributions, kraus_operators, marginalization_check, sample_protocol,
    KrausPair, Outcome, OutcomeLaw, Protocol, ProtocolDistributions, Sign, WeakMeasurementConfig,
};
pub use state::{DensityMatrix, PureState};

/// Tolerance for algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for composed operations.
pub const COMPOSED_TOL: f64 = 1e-10;
