//! Error taxonomy shared by every module.

use thiserror::Error;

/// Failure modes of the toolkit.
///
/// `Input` covers malformed or out-of-contract arguments, `Capacity` covers
/// dimension caps, `Structure` covers violated algebraic preconditions or
/// internal identities, and `Unsupported` covers operations outside the
/// implemented scope (for example non-diagonal systems on exact-only paths).
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input data.
    #[error("input error: {0}")]
    Input(String),
    /// A requested object exceeds the configured dimension cap.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// An algebraic precondition or verified identity does not hold.
    #[error("structure error: {0}")]
    Structure(String),
    /// The operation is not available for this kind of input.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
