use thiserror::Error;

/// Errors produced by the lattice toolkit.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-integer entry where an integer matrix is required: {0}")]
    Domain(String),
    #[error("matrix is singular")]
    Singular,
    #[error("gram matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("matrix does not preserve the form: {0}")]
    NotAnIsometry(String),
    #[error("map does not preserve the lattice: {0}")]
    NotAnAutomorphism(String),
    #[error("vector is not a root (norm {0}, expected 2)")]
    RootNorm(String),
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    #[error("sublattice is not contained in the lattice: {0}")]
    Containment(String),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("glue vector does not pair integrally with the base lattice: {0}")]
    Pairing(String),
    #[error("unknown catalog name: {0}")]
    Lookup(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LatticeError>;
