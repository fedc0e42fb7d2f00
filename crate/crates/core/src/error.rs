use thiserror::Error;

/// Errors produced by the ensemble engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Structural misuse: mismatched dimensions, out-of-range generators,
    /// malformed index maps and the like.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An ensemble description violates the constraints the exterior-algebra
    /// identity needs (K = b*N even, at most one odd b*q_j, distinct charges).
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    /// A population or insertion pattern is not admissible for the ensemble.
    #[error("inadmissible population: {0}")]
    Inadmissible(String),

    /// Quadrature did not reach the requested tolerance; the best estimate
    /// and its error bound are preserved so callers can decide what to do.
    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound}, target {target}")]
    QuadratureNonConvergence {
        estimate: f64,
        error_bound: f64,
        target: f64,
    },

    /// A request exceeds a configured work cap (integration dimension,
    /// map-tuple count, Monte Carlo dimension).
    #[error("work cap exceeded: {0}")]
    CapExceeded(String),

    /// Operation is outside the implemented regime (e.g. correlations for
    /// an ensemble with an odd-grade species).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Coefficient cache file problems: bad header, version mismatch, or a
    /// record whose checksum does not match its contents.
    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
