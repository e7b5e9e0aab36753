//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Coefficient list does not describe a polynomial of degree ≥ 2 with a
    /// nonzero leading coefficient.
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    /// The simultaneous root finder failed to reach its residual tolerance
    /// after the iteration budget and all randomized restarts.
    #[error("root finder did not converge (degree {degree}, residual {residual:.3e})")]
    NonConvergence { degree: usize, residual: f64 },

    /// A requested composition would exceed the configured degree cap.
    #[error("composition degree {degree} exceeds cap {cap}")]
    CompositionTooLarge { degree: usize, cap: usize },

    /// No fixed point with multiplier magnitude > 1 + 1e-6 was found.
    #[error("no repelling fixed point found")]
    NoRepellingFixedPoint,

    /// A forward random orbit left the escape radius where it was expected
    /// to stay bounded; usually signals a misclassified pair.
    #[error("forward orbit escaped the bounded region after {steps} steps")]
    OrbitEscaped { steps: usize },

    /// Truncated Neumann series terms stopped decaying geometrically.
    #[error("series terms not decaying (observed ratio {ratio:.3})")]
    SeriesNotDecaying { ratio: f64 },

    /// A preimage landed on (numerically) a critical point, so a derivative
    /// norm underflowed; the base point is too close to the postcritical set.
    #[error("preimage too close to a critical point (norm {norm:.3e})")]
    PreimageNearCritical { norm: f64 },

    /// Bisection bracket endpoints have the same sign.
    #[error("invalid bracket: proxy has the same sign at both endpoints")]
    BracketInvalid,

    /// Base point of the partner construction is not interior to the filled
    /// Julia set of the first generator (or coincides with a symmetry center).
    #[error("invalid base point for partner construction: {0}")]
    InvalidBase(String),

    /// The inclusion chain of the partner construction never held at the
    /// lower end of the t-bracket.
    #[error("partner bisection failed: {0}")]
    BisectionFailed(String),

    /// Least-squares fit over scales is degenerate (oscillation underflow
    /// or fewer scales than required).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
