//! Timing densities of energy-time entangled photons after dispersive
//! propagation: the three-photon closed form, its group-delay-complete
//! variant, frequency post-selection, and the N-photon generalization built
//! as a complex Gaussian quadratic form over the spectral detunings.
//!
//! All densities live in the dimensionless unit system of the source
//! configuration. The main closed forms work in the group-delay-removed
//! frame; only [`quantum_density_full`] and the N-photon builder consume raw
//! detection times.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussmath::{
    gauss_legendre_mapped, integrate_quadratic_form, invert_real, real_cholesky,
    tensor_quadrature_converged, ComplexQuadraticForm, QuadratureSpec,
};
use crate::params::{ArmConfig, Normalization, PostSelection, SourceConfig};

/// Coefficients of a two-variable Gaussian log-density,
/// `ln P = const - (a_tt t² + a_ttau t·τ + a_tautau τ² + l_t t + l_tau τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCoefficients {
    pub a_tt: f64,
    pub a_ttau: f64,
    pub a_tautau: f64,
    pub l_t: f64,
    pub l_tau: f64,
}

impl QuadraticCoefficients {
    /// The matrix `[[2 a_tt, a_ttau], [a_ttau, 2 a_tautau]]` whose inverse is
    /// the timing covariance.
    pub fn coefficient_matrix(&self) -> [[f64; 2]; 2] {
        [
            [2.0 * self.a_tt, self.a_ttau],
            [self.a_ttau, 2.0 * self.a_tautau],
        ]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a_tt > 0.0 && self.quadratic_det() > 0.0
    }

    /// Determinant of [`coefficient_matrix`](Self::coefficient_matrix).
    pub fn quadratic_det(&self) -> f64 {
        4.0 * self.a_tt * self.a_tautau - self.a_ttau * self.a_ttau
    }

    /// Log-density up to the normalization constant.
    pub fn exponent(&self, t: f64, tau: f64) -> f64 {
        -(self.a_tt * t * t
            + self.a_ttau * t * tau
            + self.a_tautau * tau * tau
            + self.l_t * t
            + self.l_tau * tau)
    }

    /// Location of the density maximum.
    pub fn peak_location(&self) -> (f64, f64) {
        // gradient of the quadratic vanishes at -Q^{-1} l
        let det = self.quadratic_det();
        let t = (-2.0 * self.a_tautau * self.l_t + self.a_ttau * self.l_tau) / det;
        let tau = (self.a_ttau * self.l_t - 2.0 * self.a_tt * self.l_tau) / det;
        (t, tau)
    }

    /// Density value under the requested normalization mode.
    pub fn density(&self, t: f64, tau: f64, normalization: Normalization) -> f64 {
        let value = self.exponent(t, tau).exp();
        match normalization {
            Normalization::None => value,
            Normalization::Peak => {
                let (pt, ptau) = self.peak_location();
                value / self.exponent(pt, ptau).exp()
            }
            Normalization::Integral => {
                let (pt, ptau) = self.peak_location();
                let peak = self.exponent(pt, ptau).exp();
                // ∫∫ exp(exponent) = peak · 2π / √(4 a_tt a_tautau - a_ttau²)
                value * self.quadratic_det().sqrt()
                    / (2.0 * std::f64::consts::PI * peak)
            }
        }
    }
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

/// Closed-form exponent coefficients of the three-photon coincidence density
/// in the group-delay-removed frame. Group delays in `arms` are ignored.
pub fn quantum_coefficients(
    source: &SourceConfig,
    arms: &[ArmConfig; 3],
) -> Result<QuadraticCoefficients> {
    require_three_photons(source)?;
    let s2 = source.sigma_f() * source.sigma_f();
    let s4 = s2 * s2;
    let b1 = arms[0].dispersion();
    let b2 = arms[1].dispersion();
    let b3 = arms[2].dispersion();

    let n_tt = 3.0 + 4.0 * s4 * (b2 * b2 + b2 * b3 + b3 * b3);
    let n_ttau = 3.0 + 4.0 * s4 * (b1 * b2 + 2.0 * b2 * b2 + b2 * b3 - b1 * b3);
    let n_tautau = 3.0 + 4.0 * s4 * (b1 * b1 + b1 * b2 + b2 * b2);
    let pair_sum = b1 * b2 + b1 * b3 + b2 * b3;
    let d = 9.0
        + 8.0
            * s4
            * (2.0 * (b1 * b1 + b2 * b2 + b3 * b3)
                + pair_sum
                + 2.0 * s4 * pair_sum * pair_sum);

    let k = 2.0 * s2 / d;
    Ok(QuadraticCoefficients {
        a_tt: k * n_tt,
        a_ttau: k * n_ttau,
        a_tautau: k * n_tautau,
        l_t: 0.0,
        l_tau: 0.0,
    })
}

/// Three-photon coincidence density at delays `t = t2 - t1`, `tau = t3 - t2`
/// in the group-delay-removed frame.
pub fn quantum_density(
    source: &SourceConfig,
    arms: &[ArmConfig; 3],
    t: f64,
    tau: f64,
    normalization: Normalization,
) -> Result<f64> {
    Ok(quantum_coefficients(source, arms)?.density(t, tau, normalization))
}

/// Group-delay-complete three-photon density at raw detection times.
///
/// Equals [`quantum_density`] evaluated at the group-delay-shifted delays, up
/// to an overall constant; the linear and constant exponent terms carry the
/// shift. Returned unnormalized (overall constant set to 1).
pub fn quantum_density_full(
    source: &SourceConfig,
    arms: &[ArmConfig; 3],
    t1: f64,
    t2: f64,
    t3: f64,
) -> Result<f64> {
    require_three_photons(source)?;
    let s2 = source.sigma_f() * source.sigma_f();
    let s4 = s2 * s2;
    let b1 = arms[0].dispersion();
    let b2 = arms[1].dispersion();
    let b3 = arms[2].dispersion();
    let a1 = arms[0].group_delay();
    let a2 = arms[1].group_delay();
    let a3 = arms[2].group_delay();
    let t = t2 - t1;
    let tau = t3 - t2;

    let n1 = t * t * (-3.0 - 4.0 * s4 * (b2 * b2 + b2 * b3 + b3 * b3));
    let n2 = t * tau * (-3.0 - 4.0 * s4 * (b1 * b2 + 2.0 * b2 * b2 - b1 * b3 + b2 * b3));
    let n3 = tau * tau * (-3.0 - 4.0 * s4 * (b1 * b1 + b1 * b2 + b2 * b2));
    let n4 = t
        * (a3 * (3.0 + 4.0 * s4 * (b2 * (b1 + 2.0 * b2) + (-b1 + b2) * b3))
            - 2.0 * a1 * (3.0 + 4.0 * s4 * (b2 * b2 + b2 * b3 + b3 * b3))
            + a2 * (3.0 + 4.0 * s4 * (-b1 * b2 + (b1 + b2) * b3 + 2.0 * b3 * b3)));
    let n5 = tau
        * (2.0 * a3 * (3.0 + 4.0 * s4 * (b1 * b1 + b1 * b2 + b2 * b2))
            - a2 * (3.0 + 4.0 * s4 * (2.0 * b1 * b1 - b2 * b3 + b1 * (b2 + b3)))
            - a1 * (3.0 + 4.0 * s4 * (b1 * (b2 - b3) + b2 * (2.0 * b2 + b3))));
    let n6 = -a3 * a3 * (3.0 + 4.0 * s4 * (b1 * b1 + b1 * b2 + b2 * b2))
        + a2 * a3 * (3.0 + 4.0 * s4 * (b1 * (2.0 * b1 + b2) + (b1 - b2) * b3))
        - a2 * a2 * (3.0 + 4.0 * s4 * (b1 * b1 + b1 * b3 + b3 * b3))
        - a1 * a1 * (3.0 + 4.0 * s4 * (b2 * b2 + b2 * b3 + b3 * b3))
        + a1 * (a3 * (3.0 + 4.0 * s4 * (b2 * (b1 + 2.0 * b2) + (-b1 + b2) * b3))
            + a2 * (3.0 + 4.0 * s4 * (-b1 * b2 + (b1 + b2) * b3 + 2.0 * b3 * b3)));

    let pair_sum = b1 * b2 + b1 * b3 + b2 * b3;
    let d = 9.0
        + 8.0
            * s4
            * (2.0 * (b1 * b1 + b2 * b2 + b3 * b3)
                + pair_sum
                + 2.0 * s4 * pair_sum * pair_sum);

    Ok((2.0 * s2 * (n1 + n2 + n3 + n4 + n5 + n6) / d).exp())
}

/// Two-photon timing distribution after post-selecting the frequency of
/// photon 3: a Gaussian in `t = t2 - t1` whose center is steered by the
/// selected frequency and whose variance collapses to the dispersion-free
/// value when `B1 = -B2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostSelectedTiming {
    mean: f64,
    variance: f64,
}

impl PostSelectedTiming {
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Unit-integral Gaussian density at delay `t`.
    pub fn density(&self, t: f64) -> f64 {
        let dt = t - self.mean;
        (-dt * dt / (2.0 * self.variance)).exp()
            / (2.0 * std::f64::consts::PI * self.variance).sqrt()
    }
}

/// Mean and variance of the post-selected two-photon delay distribution.
pub fn postselected_timing(
    source: &SourceConfig,
    arm1: &ArmConfig,
    arm2: &ArmConfig,
    ps: &PostSelection,
) -> Result<PostSelectedTiming> {
    require_three_photons(source)?;
    let s2 = source.sigma_f() * source.sigma_f();
    let b_sum = arm1.dispersion() + arm2.dispersion();
    let mean = (arm2.group_delay() - arm1.group_delay())
        + (arm2.dispersion() - arm1.dispersion())
            * (source.omega0() / 3.0 - ps.omega3_tilde());
    let variance = 1.0 / s2 + s2 * b_sum * b_sum;
    Ok(PostSelectedTiming { mean, variance })
}

/// Numeric oracle for the post-selected distribution: the conditioned
/// spectral integral in the sharp-filter limit, reduced to one dimension by
/// resolving the frequency constraint exactly.
pub fn postselected_density_numeric(
    source: &SourceConfig,
    arm1: &ArmConfig,
    arm2: &ArmConfig,
    ps: &PostSelection,
    t: f64,
) -> Result<f64> {
    require_three_photons(source)?;
    let s = source.sigma_f();
    let s2 = s * s;
    let eps3 = ps.omega3_tilde() - source.omega0() / 3.0;
    let b1 = arm1.dispersion();
    let b2 = arm2.dispersion();
    let t1 = -arm1.group_delay();
    let t2 = t - arm2.group_delay();

    let center = -eps3 / 2.0;
    let spec = QuadratureSpec::new(vec![center - 12.0 * s], vec![center + 12.0 * s], 32)?;
    let integrand = |x: &[f64]| {
        let e1 = x[0];
        let e2 = -e1 - eps3;
        let envelope = (-(e1 * e1 + e2 * e2) / (2.0 * s2)).exp();
        let phase = b1 * e1 * e1 + b2 * e2 * e2 - (e1 * t1 + e2 * t2);
        Complex64::from_polar(envelope, phase)
    };
    // establish the amplitude scale at the analytic mean, then allow an
    // absolute floor for tail points
    let timing = postselected_timing(source, arm1, arm2, ps)?;
    let at_mean = {
        let tm1 = -arm1.group_delay();
        let tm2 = timing.mean() - arm2.group_delay();
        let f = |x: &[f64]| {
            let e1 = x[0];
            let e2 = -e1 - eps3;
            let envelope = (-(e1 * e1 + e2 * e2) / (2.0 * s2)).exp();
            let phase = b1 * e1 * e1 + b2 * e2 * e2 - (e1 * tm1 + e2 * tm2);
            Complex64::from_polar(envelope, phase)
        };
        tensor_quadrature_converged(f, &spec, 1e-11, 0.0, 8)?
    };
    let amp = tensor_quadrature_converged(integrand, &spec, 1e-11, 1e-12 * at_mean.norm(), 8)?;
    Ok(amp.norm_sqr())
}

/// Builds the (N-1)-dimensional complex Gaussian form of the N-photon
/// effective wave function at raw detection times.
///
/// Frequencies are parameterized by detunings around `omega0 / N` with the
/// энergy-conservation constraint eliminating the last one. Diagonal entries
/// collect the filter width and `-i (B_q + B_N)`, off-diagonals the filter
/// cross term and `-i B_N`, and the linear part carries
/// `i [(t_q - A_q) - (t_N - A_N)]`. Constant filter prefactors are dropped;
/// they cancel under every normalization mode.
pub fn build_nphoton_form(
    source: &SourceConfig,
    arms: &[ArmConfig],
    times: &[f64],
) -> Result<ComplexQuadraticForm> {
    let n = source.n_photons();
    if arms.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: arms.len(),
        });
    }
    if times.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: times.len(),
        });
    }
    let dim = n - 1;
    let s2 = source.sigma_f() * source.sigma_f();
    let b_last = arms[dim].dispersion();
    let t_last = times[dim] - arms[dim].group_delay();

    let mut matrix = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    let mut linear = vec![Complex64::new(0.0, 0.0); dim];
    for q in 0..dim {
        for r in 0..dim {
            matrix[q][r] = if q == r {
                Complex64::new(1.0 / s2, -(arms[q].dispersion() + b_last))
            } else {
                Complex64::new(0.5 / s2, -b_last)
            };
        }
        let shifted = times[q] - arms[q].group_delay();
        linear[q] = Complex64::new(0.0, shifted - t_last);
    }
    ComplexQuadraticForm::new(matrix, linear, Complex64::new(0.0, 0.0))
}

fn times_from_delays(delays: &[f64]) -> Vec<f64> {
    let mut times = Vec::with_capacity(delays.len() + 1);
    times.push(0.0);
    let mut acc = 0.0;
    for d in delays {
        acc += d;
        times.push(acc);
    }
    times
}

/// Real part of the inverse of the form's matrix (row-major).
fn re_inverse(form: &ComplexQuadraticForm) -> Result<Vec<f64>> {
    let dim = form.dim();
    let mut out = vec![0.0; dim * dim];
    for k in 0..dim {
        let mut rhs = vec![Complex64::new(0.0, 0.0); dim];
        rhs[k] = Complex64::new(1.0, 0.0);
        let col = form.solve(&rhs)?;
        for i in 0..dim {
            out[i * dim + k] = col[i].re;
        }
    }
    Ok(out)
}

/// N-photon coincidence density over the `N-1` successive delays
/// `(t2 - t1, ..., tN - t{N-1})`.
pub fn nphoton_density(
    source: &SourceConfig,
    arms: &[ArmConfig],
    delays: &[f64],
    normalization: Normalization,
) -> Result<f64> {
    let n = source.n_photons();
    if delays.len() != n - 1 {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            actual: delays.len(),
        });
    }
    let times = times_from_delays(delays);
    let form = build_nphoton_form(source, arms, &times)?;
    let raw = integrate_quadratic_form(&form)?.norm_sqr();
    match normalization {
        Normalization::None => Ok(raw),
        Normalization::Peak | Normalization::Integral => {
            let dim = n - 1;
            let zero = Complex64::new(0.0, 0.0);
            let centered = ComplexQuadraticForm::new(
                (0..dim)
                    .map(|q| (0..dim).map(|r| form.matrix_entry(q, r)).collect())
                    .collect(),
                vec![zero; dim],
                zero,
            )?;
            let peak = integrate_quadratic_form(&centered)?.norm_sqr();
            if normalization == Normalization::Peak {
                return Ok(raw / peak);
            }
            // total mass = peak * (2π)^(dim/2) / sqrt(det Re(M^{-1}))
            let w = re_inverse(&form)?;
            let chol = real_cholesky(&w, dim)
                .map_err(|index| Error::NotPositiveDefinite { index })?;
            let mut det_w = 1.0;
            for k in 0..dim {
                let d = chol[k * dim + k];
                det_w *= d * d;
            }
            let total =
                peak * (2.0 * std::f64::consts::PI).powf(dim as f64 / 2.0) / det_w.sqrt();
            Ok(raw / total)
        }
    }
}

/// Covariance matrix of the `N-1` successive delays, row-major
/// `(N-1) x (N-1)`, from the quadratic-form machinery.
///
/// For `N = 3` this reproduces the inverse of the closed-form coefficient
/// matrix; for `N = 2` it is the scalar delay variance.
pub fn nphoton_delay_covariance(source: &SourceConfig, arms: &[ArmConfig]) -> Result<Vec<f64>> {
    let n = source.n_photons();
    let dim = n - 1;
    let times = vec![0.0; n];
    let form = build_nphoton_form(source, arms, &times)?;
    let w = re_inverse(&form)?;
    // The detuning differences are the cumulative sums of the delays (a
    // unit-determinant map U with U[q][i] = 1 for i >= q), and the density is
    // Gaussian in U d with precision W, so the delay covariance is
    // (U^T W U)^{-1} with (U^T W U)[i][j] = sum of W[q][r] over q <= i, r <= j.
    let mut g = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = 0.0;
            for q in 0..=i {
                for r in 0..=j {
                    acc += w[q * dim + r];
                }
            }
            g[i * dim + j] = acc;
        }
    }
    invert_real(&g, dim).ok_or(Error::NotPositiveDefinite { index: 0 })
}

/// Which spectral integration bounds the finite-range evaluation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsMode {
    /// The finite detuning wedge fixed by the pump frequency: the first
    /// detuning spans `[-omega0/3, 2 omega0/3]` and the second is capped at
    /// `2 omega0/3` minus the first.
    Wedge,
    /// A rectangle of ±12 filter widths per detuning, wide enough to stand in
    /// for the infinite-range analytic forms.
    Wide,
}

const EXACT_START_POINTS: usize = 32;
const EXACT_MAX_DOUBLINGS: usize = 7;

struct SpectralNodes {
    eps1: Vec<f64>,
    eps12: Vec<f64>,
    weight: Vec<Complex64>,
}

fn spectral_nodes(source: &SourceConfig, arms: &[ArmConfig; 3], bounds: BoundsMode, n: usize) -> SpectralNodes {
    let s = source.sigma_f();
    let s2 = s * s;
    let b1 = arms[0].dispersion();
    let b2 = arms[1].dispersion();
    let b3 = arms[2].dispersion();
    let filter_norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * s);
    let prefactor = filter_norm * filter_norm * filter_norm;

    let (outer_lo, outer_hi) = match bounds {
        BoundsMode::Wide => (-12.0 * s, 12.0 * s),
        BoundsMode::Wedge => (-source.omega0() / 3.0, 2.0 * source.omega0() / 3.0),
    };
    let (outer_nodes, outer_weights) = gauss_legendre_mapped(n, outer_lo, outer_hi);

    let mut eps1 = Vec::with_capacity(n * n);
    let mut eps12 = Vec::with_capacity(n * n);
    let mut weight = Vec::with_capacity(n * n);
    for (&e1, &w1) in outer_nodes.iter().zip(&outer_weights) {
        let (inner_lo, inner_hi) = match bounds {
            BoundsMode::Wide => (-12.0 * s, 12.0 * s),
            BoundsMode::Wedge => (
                -source.omega0() / 3.0,
                2.0 * source.omega0() / 3.0 - e1,
            ),
        };
        let (inner_nodes, inner_weights) = gauss_legendre_mapped(n, inner_lo, inner_hi);
        for (&e2, &w2) in inner_nodes.iter().zip(&inner_weights) {
            let e3 = -(e1 + e2);
            let envelope = (-(e1 * e1 + e2 * e2 + e3 * e3) / (2.0 * s2)).exp();
            let phase = b1 * e1 * e1 + b2 * e2 * e2 + b3 * e3 * e3;
            eps1.push(e1);
            eps12.push(e1 + e2);
            weight.push(Complex64::from_polar(w1 * w2 * prefactor * envelope, phase));
        }
    }
    SpectralNodes {
        eps1,
        eps12,
        weight,
    }
}

fn spectral_density_grid(nodes: &SpectralNodes, t_axis: &[f64], tau_axis: &[f64]) -> Vec<f64> {
    let nt = t_axis.len();
    let ntau = tau_axis.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); nt * ntau];
    let mut u = vec![Complex64::new(0.0, 0.0); nt];
    let mut v = vec![Complex64::new(0.0, 0.0); ntau];
    for k in 0..nodes.weight.len() {
        let e1 = nodes.eps1[k];
        let e12 = nodes.eps12[k];
        let w = nodes.weight[k];
        for (ui, &t) in u.iter_mut().zip(t_axis) {
            *ui = Complex64::from_polar(1.0, e1 * t);
        }
        for (vj, &tau) in v.iter_mut().zip(tau_axis) {
            *vj = Complex64::from_polar(1.0, e12 * tau);
        }
        for (i, ui) in u.iter().enumerate() {
            let wu = w * ui;
            let row = &mut acc[i * ntau..(i + 1) * ntau];
            for (cell, vj) in row.iter_mut().zip(&v) {
                *cell += wu * vj;
            }
        }
    }
    acc.iter().map(|a| a.norm_sqr()).collect()
}

/// Three-photon density by direct finite-range quadrature of the spectral
/// integral, sampled over the delay grid `t_axis × tau_axis` (row-major,
/// t-major), in the group-delay-removed frame.
///
/// The rule order doubles until the largest density change between
/// refinements drops below `rel_tol` times the grid peak.
pub fn exact_density_grid(
    source: &SourceConfig,
    arms: &[ArmConfig; 3],
    t_axis: &[f64],
    tau_axis: &[f64],
    bounds: BoundsMode,
    rel_tol: f64,
) -> Result<Vec<f64>> {
    require_three_photons(source)?;
    if t_axis.is_empty() || tau_axis.is_empty() {
        return Err(Error::InvalidParameter(
            "delay axes must be non-empty".to_string(),
        ));
    }
    let mut n = EXACT_START_POINTS;
    let mut prev = spectral_density_grid(&spectral_nodes(source, arms, bounds, n), t_axis, tau_axis);
    let mut worst = (0.0, 0.0);
    for _ in 0..EXACT_MAX_DOUBLINGS {
        n *= 2;
        let cur = spectral_density_grid(&spectral_nodes(source, arms, bounds, n), t_axis, tau_axis);
        let peak = cur.iter().cloned().fold(0.0_f64, f64::max);
        let mut max_diff = 0.0_f64;
        for (&a, &b) in cur.iter().zip(&prev) {
            let d = (a - b).abs();
            if d > max_diff {
                max_diff = d;
                worst = (a, b);
            }
        }
        if max_diff <= rel_tol * peak {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged {
        last: Complex64::new(worst.0, 0.0),
        previous: Complex64::new(worst.1, 0.0),
    })
}

/// Single-point version of [`exact_density_grid`] with the default
/// convergence tolerance of 1e-9 relative to the point value.
pub fn exact_density_numeric(
    source: &SourceConfig,
    arms: &[ArmConfig; 3],
    t: f64,
    tau: f64,
    bounds: BoundsMode,
) -> Result<f64> {
    Ok(exact_density_grid(source, arms, &[t], &[tau], bounds, 1e-9)?[0])
}
