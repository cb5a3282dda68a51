use thiserror::Error;

/// Crate-wide error type. Every fallible operation returns one of these
/// variants; diagnostics name the first violated constraint.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("constraint `{name}` violated: value {value} outside bound {bound}")]
    ConstraintViolation {
        name: &'static str,
        value: f64,
        bound: String,
    },

    #[error("degenerate exponent: N - alpha*p = {0} <= 0")]
    DegenerateExponent(f64),

    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),

    #[error("non-integrable singularity: local exponent {exponent} at {place}")]
    NonIntegrableSingularity { exponent: f64, place: &'static str },

    #[error("quadrature failed to converge: error {error:.3e} above target {target:.3e}")]
    NoConvergence { error: f64, target: f64 },

    #[error("integrand is nonzero where the sampling density vanishes ({0})")]
    ZeroDensityRegion(String),

    #[error("radial profile is not monotone decreasing ({0})")]
    NonMonotoneProfile(String),

    #[error("Lorentz quasinorm diverges: {0}")]
    DivergentQuasinorm(String),

    #[error("function `{0}` is rearrangement-only and not admissible for seminorms")]
    RearrangementOnlyFunction(String),

    #[error("convolution exponents do not satisfy 1 + 1/r = 1/p + 1/q (defect {0:.3e})")]
    ExponentMismatch(f64),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
