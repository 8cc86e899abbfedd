//! Classical reference: three independent Gaussian pulses broadened by the
//! same dispersive media, and the resulting triple-coincidence timing
//! density.
//!
//! The classical exponent depends on each arm's dispersion only through its
//! square, so no sign choice can undo the broadening; that sign-blindness is
//! the classical contrast to the pairwise products in the quantum exponent.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussmath::{tensor_quadrature_converged, QuadratureSpec};
use crate::params::{ArmConfig, Normalization, SourceConfig};
use crate::quantum::QuadraticCoefficients;

/// Derived per-arm pulse quantities: the transform-limited variance
/// `sigma0² = 1 / (2 sigma_F²)` and the dispersion-broadened variance
/// `(sigma0⁴ + B²) / sigma0²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseState {
    arm: ArmConfig,
    sigma0_sq: f64,
    broadened_variance: f64,
}

impl PulseState {
    pub fn new(source: &SourceConfig, arm: ArmConfig) -> Self {
        let sigma0_sq = 1.0 / (2.0 * source.sigma_f() * source.sigma_f());
        let b = arm.dispersion();
        Self {
            arm,
            sigma0_sq,
            broadened_variance: (sigma0_sq * sigma0_sq + b * b) / sigma0_sq,
        }
    }

    pub fn arm(&self) -> ArmConfig {
        self.arm
    }

    pub fn sigma0_sq(&self) -> f64 {
        self.sigma0_sq
    }

    pub fn broadened_variance(&self) -> f64 {
        self.broadened_variance
    }
}

/// Complex field envelope of one pulse at the detector, with the carrier
/// phase dropped and the source amplitude set to 1.
pub fn pulse_field(source: &SourceConfig, arm: &ArmConfig, t: f64) -> Complex64 {
    let s0 = 1.0 / (2.0 * source.sigma_f() * source.sigma_f());
    let b = arm.dispersion();
    let dt = t - arm.group_delay();
    let width = Complex64::new(s0, -b).sqrt();
    let prefactor = 1.0 / (2.0 * std::f64::consts::PI.sqrt()) / width;
    let exponent = -Complex64::new(s0, b) * (dt * dt) / (4.0 * (s0 * s0 + b * b));
    prefactor * exponent.exp()
}

/// Detected intensity of one pulse: a Gaussian of variance
/// `(sigma0⁴ + B²) / sigma0²` centered at the arm's group delay.
pub fn pulse_intensity(source: &SourceConfig, arm: &ArmConfig, t: f64) -> f64 {
    let state = PulseState::new(source, *arm);
    let s0 = state.sigma0_sq;
    let b = arm.dispersion();
    let dt = t - arm.group_delay();
    let width_sq = (s0 * s0 + b * b).sqrt();
    (-dt * dt / (2.0 * state.broadened_variance)).exp()
        / (4.0 * std::f64::consts::PI * width_sq)
}

fn require_three_photons(source: &SourceConfig) -> Result<()> {
    if source.n_photons() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            actual: source.n_photons(),
        });
    }
    Ok(())
}

/// Closed-form exponent coefficients of the classical triple-coincidence
/// density in the group-delay-removed frame.
pub fn classical_coefficients(
    source: &SourceConfig,
    arms: &[ArmConfig; 3],
) -> Result<QuadraticCoefficients> {
    require_three_photons(source)?;
    let s2 = source.sigma_f() * source.sigma_f();
    let s4 = s2 * s2;
    let b1 = arms[0].dispersion();
    let b2 = arms[1].dispersion();
    let b3 = arms[2].dispersion();

    let n_tt = 1.0 + 2.0 * s4 * (b2 * b2 + b3 * b3);
    let n_ttau = 1.0 + 4.0 * s4 * b2 * b2;
    let n_tautau = 1.0 + 2.0 * s4 * (b2 * b2 + b1 * b1);
    let d = 3.0
        + 8.0
            * s4
            * (b1 * b1
                + b2 * b2
                + b3 * b3
                + 2.0 * s4 * (b1 * b1 * b2 * b2 + b2 * b2 * b3 * b3 + b3 * b3 * b1 * b1));

    let k = 2.0 * s2 / d;
    Ok(QuadraticCoefficients {
        a_tt: k * n_tt,
        a_ttau: k * n_ttau,
        a_tautau: k * n_tautau,
        l_t: 0.0,
        l_tau: 0.0,
    })
}

/// Classical triple-coincidence density at delays `t = t2 - t1`,
/// `tau = t3 - t2` in the group-delay-removed frame.
pub fn classical_density(
    source: &SourceConfig,
    arms: &[ArmConfig; 3],
    t: f64,
    tau: f64,
    normalization: Normalization,
) -> Result<f64> {
    Ok(classical_coefficients(source, arms)?.density(t, tau, normalization))
}

/// Independent numeric path: integrates the product of the three detected
/// intensities over the first detection time. Group delays are removed the
/// same way as in the closed form.
pub fn classical_density_numeric(
    source: &SourceConfig,
    arms: &[ArmConfig; 3],
    t: f64,
    tau: f64,
) -> Result<f64> {
    require_three_photons(source)?;
    let centered: Vec<ArmConfig> = arms
        .iter()
        .map(|a| ArmConfig::new(0.0, a.dispersion()))
        .collect::<Result<_>>()?;
    let max_sigma = centered
        .iter()
        .map(|a| PulseState::new(source, *a).broadened_variance().sqrt())
        .fold(0.0_f64, f64::max);
    // the three factors peak at t1 = 0, -t and -(t + tau)
    let centers = [0.0, -t, -(t + tau)];
    let lo = centers.iter().cloned().fold(f64::INFINITY, f64::min) - 12.0 * max_sigma;
    let hi = centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 12.0 * max_sigma;
    let spec = QuadratureSpec::new(vec![lo], vec![hi], 32)?;
    let value = tensor_quadrature_converged(
        |x| {
            let t1 = x[0];
            let product = pulse_intensity(source, &centered[0], t1)
                * pulse_intensity(source, &centered[1], t1 + t)
                * pulse_intensity(source, &centered[2], t1 + t + tau);
            Complex64::new(product, 0.0)
        },
        &spec,
        1e-11,
        0.0,
        8,
    )?;
    Ok(value.re)
}
