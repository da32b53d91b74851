use crate::runners::TrialRecord;
use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter fell outside its admissible range.
    #[error("{name} = {value} is out of range (expected {expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Marked-set description cannot define a valid oracle.
    #[error("invalid oracle: {0}")]
    InvalidOracle(String),

    /// Initial-state description is unusable.
    #[error("invalid preparation: {0}")]
    InvalidPreparation(String),

    /// The prepared state has no component in the marked subspace, so the
    /// success probability is exactly zero and amplification cannot start.
    #[error("initial state has zero overlap with the marked subspace")]
    ZeroOverlap,

    /// The state-vector left the two-dimensional invariant plane. The
    /// dynamics provably preserve the plane, so this always signals a bug.
    #[error("state left the invariant plane (residual {residual:.3e})")]
    OutOfPlane { residual: f64 },

    /// Run configuration is internally inconsistent.
    #[error("inconsistent run configuration: {0}")]
    InconsistentConfig(String),

    /// The requested operation needs the weak-measurement strength to sit in
    /// the efficient regime.
    #[error("kappa = {kappa} exceeds the efficient-regime bound {bound}")]
    OutsideEfficientRegime { kappa: f64, bound: f64 },

    /// A single run hit its iteration safety cap. Carries the partial record
    /// accumulated up to the cap.
    #[error("iteration cap {cap} exceeded")]
    IterationCapExceeded { cap: u64, record: Box<TrialRecord> },

    /// A Monte Carlo trial hit the iteration cap; wraps the per-run error
    /// with the index of the offending trial.
    #[error("trial {trial}: iteration cap {cap} exceeded")]
    TrialCapExceeded {
        trial: u64,
        cap: u64,
        record: Box<TrialRecord>,
    },

    /// An operation that needs at least one sample received none.
    #[error("empty sample set")]
    EmptySamples,

    /// Serialized data could not be parsed.
    #[error("malformed {format} input: {detail}")]
    Parse {
        format: &'static str,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
