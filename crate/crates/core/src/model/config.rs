use std::fmt;

use crate::qlinalg::{ModeLayout, C64};

use super::ModelError;

/// Largest accepted Fock truncation. Keeps the full dimension below 600.
pub const MAX_N_MAX: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum UnitMode {
    /// Rates in units of τ (τ = 1 by convention); times in 1/τ.
    #[default]
    Dimensionless,
    /// Angular frequencies in rad/μs, rates in 1/μs, times in μs.
    Physical,
}

impl UnitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitMode::Dimensionless => "dimensionless",
            UnitMode::Physical => "physical",
        }
    }
}

/// How a configured rate maps onto the dissipator coefficient.
///
/// `Coefficient` multiplies `𝓛[J]ρ = 2JρJ† − J†Jρ − ρJ†J` directly, so a lone
/// channel empties its excited state as `e^{−2 rate t}`. `DecayRate` halves every
/// coefficient (the `c = √rate · J` collapse-operator convention) so that the
/// rate is the population decay rate and `1/rate` the 1/e lifetime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum RateConvention {
    #[default]
    Coefficient,
    DecayRate,
}

impl RateConvention {
    pub fn factor(self) -> f64 {
        match self {
            RateConvention::Coefficient => 1.0,
            RateConvention::DecayRate => 0.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RateConvention::Coefficient => "coefficient",
            RateConvention::DecayRate => "decay_rate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Frame {
    Lab,
    /// Rotating at `ω_d` times the total excitation number.
    #[default]
    RotatingAtDrive,
}

impl Frame {
    pub fn as_str(self) -> &'static str {
        match self {
            Frame::Lab => "lab",
            Frame::RotatingAtDrive => "rotating",
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coherent qubit drive `Θ(t0 − t) Ω_d (σ† e^{−iω_d t} + h.c.)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    pub omega_d: f64,
    pub rabi: f64,
    /// Pulse duration; `f64::INFINITY` for a drive that never switches off.
    pub t0: f64,
}

impl PulseSpec {
    pub fn continuous(omega_d: f64, rabi: f64) -> Self {
        Self { omega_d, rabi, t0: f64::INFINITY }
    }

    /// Whether the drive term is present at time `t`.
    pub fn is_on(&self, t: f64) -> bool {
        self.rabi != 0.0 && t < self.t0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub omega_sigma: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub tau: f64,
    pub eta_sigma: C64,
    pub eta_a: C64,
    pub eta_b: C64,
    pub drive: PulseSpec,
    pub gamma_sigma: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_phi: f64,
    pub n_max: usize,
    pub unit_mode: UnitMode,
    pub rate_convention: RateConvention,
    pub rtol: f64,
    pub atol: f64,
}

impl SystemConfig {
    pub const DEFAULT_RTOL: f64 = 1e-8;
    pub const DEFAULT_ATOL: f64 = 1e-10;

    /// Resonant lossless configuration in units of τ with ω/τ = 500 and the
    /// drive switched off.
    pub fn dimensionless(eta: [C64; 3]) -> Self {
        Self {
            omega_sigma: 500.0,
            omega_a: 500.0,
            omega_b: 500.0,
            tau: 1.0,
            eta_sigma: eta[0],
            eta_a: eta[1],
            eta_b: eta[2],
            drive: PulseSpec::continuous(500.0, 0.0),
            gamma_sigma: 0.0,
            gamma_a: 0.0,
            gamma_b: 0.0,
            gamma_phi: 0.0,
            n_max: 2,
            unit_mode: UnitMode::Dimensionless,
            rate_convention: RateConvention::Coefficient,
            rtol: Self::DEFAULT_RTOL,
            atol: Self::DEFAULT_ATOL,
        }
    }

    pub fn eta(&self) -> [C64; 3] {
        [self.eta_sigma, self.eta_a, self.eta_b]
    }

    pub fn set_eta(&mut self, eta: [C64; 3]) {
        [self.eta_sigma, self.eta_a, self.eta_b] = eta;
    }

    /// Reference frequency ω₀, taken as the qubit frequency.
    pub fn omega0(&self) -> f64 {
        self.omega_sigma
    }

    pub fn layout(&self) -> ModeLayout {
        ModeLayout::with_truncation(self.n_max).expect("n_max validated")
    }

    /// `|η_σ|² + |η_a|² + |η_b|²`.
    pub fn eta_norm_sqr(&self) -> f64 {
        self.eta().iter().map(|z| z.norm_sqr()).sum()
    }

    /// τ as it multiplies `𝓛[o]` after the rate convention is applied.
    pub fn tau_coefficient(&self) -> f64 {
        self.tau * self.rate_convention.factor()
    }

    pub fn has_intrinsic_loss(&self) -> bool {
        self.gamma_sigma > 0.0 || self.gamma_a > 0.0 || self.gamma_b > 0.0 || self.gamma_phi > 0.0
    }

    /// Checks the hard invariants; soft validity conditions are reported by
    /// [`super::validate_config`] instead.
    pub fn validate(&self) -> Result<(), ModelError> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::Invalid { field: name, reason: format!("must be finite, got {v}") })
            }
        };
        let non_negative = |name: &'static str, v: f64| {
            finite(name, v)?;
            if v >= 0.0 {
                Ok(())
            } else {
                Err(ModelError::Invalid { field: name, reason: format!("must be >= 0, got {v}") })
            }
        };
        non_negative("omega_sigma", self.omega_sigma)?;
        non_negative("omega_a", self.omega_a)?;
        non_negative("omega_b", self.omega_b)?;
        finite("tau", self.tau)?;
        if self.tau <= 0.0 {
            return Err(ModelError::Invalid { field: "tau", reason: format!("must be > 0, got {}", self.tau) });
        }
        for (name, z) in [("eta_sigma", self.eta_sigma), ("eta_a", self.eta_a), ("eta_b", self.eta_b)] {
            finite(name, z.re)?;
            finite(name, z.im)?;
        }
        non_negative("drive.omega_d", self.drive.omega_d)?;
        non_negative("drive.rabi", self.drive.rabi)?;
        if self.drive.t0.is_nan() || self.drive.t0 <= 0.0 {
            return Err(ModelError::Invalid {
                field: "drive.t0",
                reason: format!("must be > 0 or inf, got {}", self.drive.t0),
            });
        }
        non_negative("gamma_sigma", self.gamma_sigma)?;
        non_negative("gamma_a", self.gamma_a)?;
        non_negative("gamma_b", self.gamma_b)?;
        non_negative("gamma_phi", self.gamma_phi)?;
        if !(2..=MAX_N_MAX).contains(&self.n_max) {
            return Err(ModelError::Invalid {
                field: "n_max",
                reason: format!("must be in 2..={MAX_N_MAX}, got {}", self.n_max),
            });
        }
        for (name, v) in [("rtol", self.rtol), ("atol", self.atol)] {
            finite(name, v)?;
            if v <= 0.0 {
                return Err(ModelError::Invalid { field: name, reason: format!("must be > 0, got {v}") });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SystemConfig {
        SystemConfig::dimensionless([C64::new(2.0, 0.0), C64::new(-1.0, 0.0), C64::new(-1.0, 0.0)])
    }

    #[test]
    fn defaults_are_valid() {
        base().validate().unwrap();
        assert_eq!(base().layout().dim(), 18);
    }

    #[test]
    fn invariant_violations() {
        let mut c = base();
        c.tau = 0.0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.gamma_b = -1e-3;
        assert!(c.validate().is_err());
        let mut c = base();
        c.n_max = 1;
        assert!(c.validate().is_err());
        let mut c = base();
        c.drive.t0 = 0.0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.drive.rabi = f64::NAN;
        assert!(c.validate().is_err());
    }

    #[test]
    fn convention_factor() {
        let mut c = base();
        assert_eq!(c.tau_coefficient(), 1.0);
        c.rate_convention = RateConvention::DecayRate;
        assert_eq!(c.tau_coefficient(), 0.5);
    }
}
