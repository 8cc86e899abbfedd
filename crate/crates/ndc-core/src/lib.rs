//! Coincidence-timing densities for energy-time entangled photons and
//! classical pulses propagating through dispersive media.
//!
//! The crate computes, in one consistent dimensionless unit system:
//!
//! - the joint detection-delay density of three entangled photons after
//!   per-arm group delay and quadratic dispersion, in closed form and by
//!   direct finite-range quadrature of the underlying spectral integral;
//! - the same density generalized to N photons, built as a multivariate
//!   complex Gaussian quadratic form;
//! - the frequency post-selected two-photon timing distribution;
//! - the classical reference: triple coincidences of three independent
//!   Gaussian pulses broadened by the same media;
//! - grid sampling, moment extraction and quantum/classical variance
//!   comparison reports.
//!
//! The nonlocal-cancellation structure shows up as pairwise dispersion
//! products in the quantum exponent (sign-sensitive, partially cancellable)
//! versus purely squared dispersion terms in the classical exponent
//! (sign-blind, never cancellable).

pub mod analysis;
pub mod classical;
pub mod error;
pub mod gaussmath;
pub mod params;
pub mod quantum;

pub use analysis::{
    compare, covariance_from_coefficients, evaluate_grid, fit_gaussian, ComparisonReport,
    GaussianTimingDistribution, Grid2D,
};
pub use classical::{
    classical_coefficients, classical_density, classical_density_numeric, pulse_field,
    pulse_intensity, PulseState,
};
pub use error::{Error, Result};
pub use gaussmath::{
    gaussian_integral_1d, integrate_quadratic_form, tensor_quadrature,
    tensor_quadrature_converged, ComplexQuadraticForm, QuadratureSpec,
};
pub use params::{ArmConfig, Normalization, PostSelection, SourceConfig};
pub use quantum::{
    build_nphoton_form, exact_density_grid, exact_density_numeric, nphoton_delay_covariance,
    nphoton_density, postselected_density_numeric, postselected_timing, quantum_coefficients,
    quantum_density, quantum_density_full, BoundsMode, PostSelectedTiming, QuadraticCoefficients,
};
