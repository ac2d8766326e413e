use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("basis {which} is not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { which: char, deviation: f64 },

    #[error("A-projector {j} coincides with B-projector {k}")]
    SharedProjector { j: usize, k: usize },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("coupling strength {0} outside (0, pi/2]")]
    InvalidEpsilon(f64),

    #[error("overlap <b_{k}|a_{j}> = {overlap:e} is at or below the inversion floor")]
    IllConditionedOverlap { j: usize, k: usize, overlap: f64 },

    #[error("internal inconsistency in {what}: deviation {deviation:e}")]
    InternalInconsistency { what: &'static str, deviation: f64 },

    #[error("insufficient samples in {cell}: {count} < {required}")]
    InsufficientSamples { cell: String, count: u64, required: u64 },

    #[error("state is not KD-positive (nonpositivity {0:e})")]
    NotKdPositive(f64),

    #[error("coupling strength {0} is not below sqrt(5)/5")]
    EpsilonTooLarge(f64),

    #[error("weak value w[{j},{lambda}] undefined at a reachable ontic state")]
    UndefinedWeakValue { j: usize, lambda: usize },

    #[error("generator set is empty")]
    SetEmpty,

    #[error("no separating witness: optimal gap {gap:e} is within tolerance")]
    NoSeparation { gap: f64 },

    #[error("no pure state satisfies Tr(H psi) >= {threshold}")]
    EmptyFeasibleSet { threshold: f64 },

    #[error("witness is degenerate (Frobenius norm {0})")]
    DegenerateWitness(f64),

    #[error("not a decomposition of the target state (residual {0:e})")]
    NotADecomposition(f64),

    #[error("ledger has {ledger} entries but the record has {record}")]
    LedgerMismatch { ledger: usize, record: usize },

    #[error("invalid protocol id {0}")]
    InvalidProtocol(u8),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Errors caused by too little data rather than by invalid input.
    pub fn is_insufficient_data(&self) -> bool {
        matches!(self, Error::InsufficientSamples { .. })
    }
}
