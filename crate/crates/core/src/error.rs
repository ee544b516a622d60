use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Differential-privacy parameter below zero or NaN.
    InvalidEpsilon(f64),
    /// Channel fidelity outside `[1/2, 1]`.
    InvalidFidelity(f64),
    /// Purchase cutoff outside `[0, 1]`.
    InvalidCutoff(f64),
    /// A game parameter violates the standing assumptions.
    InvalidParams(&'static str),
    /// A distribution or type-model parameter is out of range.
    InvalidModel(&'static str),
    /// Bracketed root search found no sign change.
    NoSignChange { lo: f64, hi: f64 },
    /// Adaptive quadrature ran out of subdivisions.
    QuadratureDiverged { a: f64, b: f64, error: f64 },
    /// A uniform-equilibrium query does not match the side of η the prior is on.
    InconsistentKind,
    /// The welfare derivative is undefined at a corner solution.
    CornerSolution,
    InvalidSampleSize,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidEpsilon(e) => write!(f, "epsilon must be non-negative, got {e}"),
            Error::InvalidFidelity(q) => write!(f, "fidelity q must lie in [1/2, 1], got {q}"),
            Error::InvalidCutoff(v) => write!(f, "cutoff must lie in [0, 1], got {v}"),
            Error::InvalidParams(msg) => write!(f, "invalid game parameters: {msg}"),
            Error::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            Error::NoSignChange { lo, hi } => {
                write!(f, "no sign change on bracket [{lo}, {hi}]")
            }
            Error::QuadratureDiverged { a, b, error } => write!(
                f,
                "quadrature on [{a}, {b}] did not converge (error estimate {error:e})"
            ),
            Error::InconsistentKind => {
                write!(f, "requested uniform kind is inconsistent with the prior side of eta")
            }
            Error::CornerSolution => write!(f, "welfare derivative undefined at a corner solution"),
            Error::InvalidSampleSize => write!(f, "sample size must be at least 1"),
        }
    }
}

impl core::error::Error for Error {}
