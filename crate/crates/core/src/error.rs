use thiserror::Error;

use crate::linalg::SystemSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("label `{0}` appears in both factors of a tensor product")]
    LabelCollision(String),

    #[error("label `{0}` is not part of the space")]
    UnknownLabel(String),

    #[error("label `{0}` is registered twice")]
    DuplicateLabel(String),

    #[error("subsystem `{label}` has dimension 0")]
    ZeroDimension { label: String },

    #[error("total dimension {dimension} exceeds the dense limit of {limit}")]
    DimensionTooLarge { dimension: usize, limit: usize },

    #[error("expected {expected} amplitudes/rows, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("state has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("operator is not Hermitian (max |A - A^H| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not a density operator: {0}")]
    NotDensity(String),

    #[error("reference system is not declared isolated")]
    NotIsolated,

    #[error("systems {first} and {second} are not disjoint (shared: {overlap})")]
    NonDisjointSystems {
        first: SystemSet,
        second: SystemSet,
        overlap: SystemSet,
    },

    #[error("candidate index {index} out of range for {system} ({count} candidates)")]
    CandidateOutOfRange {
        system: SystemSet,
        index: usize,
        count: usize,
    },

    #[error("invalid candidate basis for {system}: {reason}")]
    InvalidBasis { system: SystemSet, reason: String },

    #[error("empty system set")]
    EmptySystem,

    #[error("probability {value} outside [0, 1] beyond tolerance")]
    ProbabilityOutOfRange { value: f64 },
}
