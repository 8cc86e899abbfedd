use std::fmt;

use num_complex::Complex64;

/// Errors produced by the timing-density computations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A Gaussian integral was requested with a non-decaying integrand.
    NonPositiveRealPart { re: f64 },
    /// The real part of a quadratic-form matrix is not positive definite;
    /// `index` is the pivot (eigen-direction) where the factorization failed.
    NotPositiveDefinite { index: usize },
    /// A quadratic-form matrix was not bit-for-bit symmetric.
    AsymmetricMatrix { row: usize, col: usize },
    /// Vector/matrix sizes do not match the declared dimension.
    DimensionMismatch { expected: usize, actual: usize },
    /// A configuration value violates its invariant.
    InvalidParameter(String),
    /// Dyadic quadrature refinement ran out of levels before the last two
    /// estimates agreed to the requested tolerance.
    QuadratureNotConverged { last: Complex64, previous: Complex64 },
    /// A density evaluated to a non-finite value at the named grid point.
    NonFiniteDensity { t: f64, tau: f64 },
    /// Too much probability mass sits on the grid boundary for a moment fit.
    MassLeakage { boundary_ratio: f64 },
    /// The fitted width is below the grid resolution; moments are unreliable.
    GridTooCoarse { sigma: f64, spacing: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonPositiveRealPart { re } => {
                write!(f, "Gaussian integral requires Re(a) > 0, got {re}")
            }
            Error::NotPositiveDefinite { index } => {
                write!(
                    f,
                    "real part of the quadratic form is not positive definite \
                     (pivot {index} failed)"
                )
            }
            Error::AsymmetricMatrix { row, col } => {
                write!(f, "matrix entry ({row},{col}) differs from ({col},{row})")
            }
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::QuadratureNotConverged { last, previous } => {
                write!(
                    f,
                    "quadrature did not converge: last estimate {last}, previous {previous}"
                )
            }
            Error::NonFiniteDensity { t, tau } => {
                write!(f, "density is not finite at grid point (t={t}, tau={tau})")
            }
            Error::MassLeakage { boundary_ratio } => {
                write!(
                    f,
                    "grid boundary carries {boundary_ratio:.3e} of the peak density; \
                     widen the grid before fitting moments"
                )
            }
            Error::GridTooCoarse { sigma, spacing } => {
                write!(
                    f,
                    "fitted width {sigma:.3e} is below twice the grid spacing {spacing:.3e}; \
                     refine the grid"
                )
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
