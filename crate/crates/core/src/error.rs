//! Error types shared across the library.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two tangent vectors were combined but live in different tangent spaces.
    #[error("tangent-space mismatch: {0}")]
    BaseMismatch(String),

    /// A coordinate array does not satisfy the manifold's point invariants.
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    /// A coordinate array does not satisfy the tangency invariants.
    #[error("invalid tangent vector: {0}")]
    InvalidTangent(String),

    /// Logarithm map (or transport along the connecting geodesic) is
    /// undefined because the two points lie on each other's cut locus.
    #[error("logarithm map undefined at the cut locus: {0}")]
    CutLocus(String),

    /// A parameter left the mathematical domain of a formula.
    #[error("domain violation: {0}")]
    DomainViolation(String),

    /// Inconsistent or unusable configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An optimizer step failed; carries the iteration index and cause.
    #[error("iteration {iter} failed: {source}")]
    IterationFault {
        iter: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error as an iteration fault at step `iter`.
    pub fn at_iteration(self, iter: usize) -> Error {
        Error::IterationFault {
            iter,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
