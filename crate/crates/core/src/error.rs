use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants are grouped by the layer that raises them; every message names
/// the constraint that was violated.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("cannot normalize the zero vector")]
    ZeroVector,

    #[error("invalid rational literal {0:?}")]
    ParseRational(String),

    #[error("invalid encoding: {0}")]
    Encoding(String),

    #[error("encoding is not in convex position (code {index} lies in the hull of the others)")]
    NotConvexPosition { index: usize },

    #[error("invalid disjunctive family: {0}")]
    Family(String),

    #[error("formulation error: {0}")]
    Formulation(String),

    #[error("polyhedron is unbounded")]
    Unbounded,

    #[error("branching precondition violated: {0}")]
    Branching(String),

    #[error("scheme `{scheme}` is incompatible with the encoding: {reason}")]
    IncompatibleScheme { scheme: &'static str, reason: String },

    #[error("separation certificate {index} failed: {reason}")]
    Certificate { index: usize, reason: String },

    #[error("malformed document: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
