use crate::error::{Error, Result};

/// Pump and filter configuration shared by the quantum and classical paths.
///
/// All quantities are dimensionless; the figures' convention is `omega0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceConfig {
    omega0: f64,
    n_photons: usize,
    sigma_f: f64,
}

impl SourceConfig {
    pub fn new(omega0: f64, n_photons: usize, sigma_f: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega0 must be positive and finite, got {omega0}"
            )));
        }
        if n_photons < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_photons must be at least 2, got {n_photons}"
            )));
        }
        if !(sigma_f > 0.0) || !sigma_f.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma_f must be positive and finite, got {sigma_f}"
            )));
        }
        Ok(Self {
            omega0,
            n_photons,
            sigma_f,
        })
    }

    /// Three-photon source, the configuration used throughout the closed forms.
    pub fn three_photon(omega0: f64, sigma_f: f64) -> Result<Self> {
        Self::new(omega0, 3, sigma_f)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn sigma_f(&self) -> f64 {
        self.sigma_f
    }

    /// Common filter center frequency, `omega0 / N`.
    pub fn filter_center(&self) -> f64 {
        self.omega0 / self.n_photons as f64
    }

    /// True when the filter bandwidth is small enough that the infinite-range
    /// analytic forms are trustworthy; wider filters are allowed but the
    /// finite-range numerics will visibly deviate.
    pub fn is_narrowband(&self) -> bool {
        self.sigma_f <= self.omega0 / (3.0 * self.n_photons as f64)
    }
}

/// Accumulated propagation constants of one detection arm: the group delay
/// `alpha * x` (time) and the accumulated dispersion `beta * x` (time squared).
///
/// Negative dispersion models anomalous media; there is no sign restriction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmConfig {
    group_delay: f64,
    dispersion: f64,
}

impl ArmConfig {
    pub fn new(group_delay: f64, dispersion: f64) -> Result<Self> {
        if !group_delay.is_finite() || !dispersion.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "arm parameters must be finite, got group_delay={group_delay}, \
                 dispersion={dispersion}"
            )));
        }
        Ok(Self {
            group_delay,
            dispersion,
        })
    }

    /// Arm with dispersion only, the configuration of the main closed forms.
    pub fn dispersion_only(dispersion: f64) -> Result<Self> {
        Self::new(0.0, dispersion)
    }

    pub fn group_delay(&self) -> f64 {
        self.group_delay
    }

    pub fn dispersion(&self) -> f64 {
        self.dispersion
    }
}

/// Frequency post-selection of photon 3 by a narrow-band measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostSelection {
    omega3_tilde: f64,
}

impl PostSelection {
    /// The selected frequency must lie strictly inside `(0, omega0)`.
    pub fn new(omega3_tilde: f64, source: &SourceConfig) -> Result<Self> {
        if !omega3_tilde.is_finite() || omega3_tilde <= 0.0 || omega3_tilde >= source.omega0() {
            return Err(Error::InvalidParameter(format!(
                "post-selected frequency must lie in (0, {}), got {omega3_tilde}",
                source.omega0()
            )));
        }
        Ok(Self { omega3_tilde })
    }

    pub fn omega3_tilde(&self) -> f64 {
        self.omega3_tilde
    }
}

/// How a density or sampled grid is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Scale so the peak value is 1.
    Peak,
    /// Scale so the density integrates to 1.
    Integral,
    /// Raw exponent values with all undetermined prefactors set to 1.
    None,
}

impl Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::Peak => "peak",
            Normalization::Integral => "integral",
            Normalization::None => "none",
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "peak" => Ok(Normalization::Peak),
            "integral" => Ok(Normalization::Integral),
            "none" => Ok(Normalization::None),
            other => Err(Error::InvalidParameter(format!(
                "unknown normalization '{other}' (expected peak, integral or none)"
            ))),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
