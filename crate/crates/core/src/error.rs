//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Malformed arguments: dimension mismatches, non-finite entries,
    /// impossible parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operator expected to be positive semidefinite has an eigenvalue
    /// below the allowed tolerance.
    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e}, tolerance {tolerance:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64, tolerance: f64 },

    /// A Choi matrix fails positivity, so no Kraus decomposition exists.
    #[error("map is not completely positive (min Choi eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    /// An outcome-indexed family of operations fails its normalization.
    #[error("malformed instrument: {0}")]
    MalformedInstrument(String),

    /// A measurement process violates one of its structural invariants.
    #[error("malformed process: {0}")]
    MalformedProcess(String),

    /// A construction requires strictly positive inputs (full-rank apparatus
    /// preparation, strictly positive observable) and was given something
    /// rank-deficient.
    #[error("third-law obstruction: {0}")]
    ThirdLawObstruction(String),

    /// The two independent purity tests disagree near a tolerance boundary;
    /// the classification is reported as an error instead of a guess.
    #[error("ambiguous classification: {0}")]
    AmbiguousClassification(String),

    /// Two algebraically identical quantities disagreed beyond tolerance.
    /// This signals an implementation bug, never a property of the input.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}
