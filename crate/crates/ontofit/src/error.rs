//! Error type shared across the library.

/// Errors raised by library operations.
#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum Error {
    /// Caller violated an operation's contract (empty operand list, arity
    /// mismatch, schema conflict, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// A documented precondition failed (e.g. canonical CQ on a pointed
    /// instance with repeated or out-of-domain distinguished values).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A distinguished value outside the active domain is forced to map to
    /// two different targets.
    #[error("unsatisfiable point constraint: {0}")]
    PointConstraint(String),

    /// The operation only supports unary/binary schemas (DL dialects).
    #[error("dialect error: {0}")]
    Dialect(String),

    /// A configured resource cap was exceeded; the result is unknown, not
    /// wrong.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// Malformed input text.
    #[error("parse error: {0}")]
    Parse(String),

    /// An internal consistency check failed (a characterization produced a
    /// witness that does not verify). Never silently repaired.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
