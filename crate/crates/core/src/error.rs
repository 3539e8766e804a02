use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the documented range of the operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input violates a mathematical precondition (e.g. an unphysical
    /// covariance matrix or a support violation).
    #[error("domain error: {0}")]
    Domain(String),

    /// A symplectic eigenvalue sits on the pure-state singularity of the
    /// Gibbs matrix.
    #[error("singular state: {0}")]
    SingularState(String),

    /// The finite-resource simulation degenerates at a quantum-limited point.
    #[error("quantum-limited singularity: {0}; use pure_loss_resource for the pure-loss channel")]
    QuantumLimitedSingularity(String),

    /// A truncated Fock distribution leaves too much probability in the tail.
    #[error("cutoff {cutoff} too small: tail mass {tail_mass:e} exceeds {tolerance:e}")]
    CutoffTooSmall {
        cutoff: usize,
        tail_mass: f64,
        tolerance: f64,
    },

    /// A numerical routine produced an inconsistent result.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An internal consistency check failed.
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
