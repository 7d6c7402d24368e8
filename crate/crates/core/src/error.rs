use thiserror::Error;

/// Errors raised by set construction, partition handling and the numeric routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |M - M^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max |U U^dagger - I| = {0:e})")]
    NotUnitary(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("relabeling is not injective: {0}")]
    NonInjective(String),

    #[error("state {label} has weight on index {index}, which the relabeling leaves unmapped")]
    UnmappedIndex { label: String, index: usize },

    #[error("state set is not orthogonal (max overlap {0:e})")]
    NotOrthogonal(f64),

    #[error("state set spans the whole space; the complement state is undefined")]
    CompleteSet,

    #[error("product basis completion failed: {0}")]
    CompletionFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
