use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A grid, grating, beam or scan description is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two profiles or fields that must share a grid do not.
    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// The near-field intensity has no fringe peak near the grating frequency.
    #[error("no revival at z = {z:.6e} m: spectral peak is only {ratio:.2}x the noise floor")]
    NoRevival { z: f64, ratio: f64 },

    /// The fit objective evaluated to NaN or infinity.
    #[error("fit objective is not finite at R = {radius:.6e} m")]
    NonFiniteObjective { radius: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
