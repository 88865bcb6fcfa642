//! Parameter sets used by the figure runners.

use std::f64::consts::TAU;

use crate::model::{PulseSpec, RateConvention, SystemConfig, UnitMode};
use crate::qlinalg::C64;

/// `ω/τ` for every mode and the drive in the dimensionless scenarios.
pub const IDEAL_OMEGA_OVER_TAU: f64 = 500.0;

pub const PROTOTYPE_ETA: [f64; 3] = [2.0, -1.0, -1.0];
pub const SYMMETRIC_ETA: [f64; 3] = [1.0, 1.0, 1.0];

pub fn real_eta(eta: [f64; 3]) -> [C64; 3] {
    eta.map(|x| C64::new(x, 0.0))
}

/// Lossless resonant system in units of τ, driven at `rabi_over_tau · τ`
/// for a pulse of length `t0` (use `f64::INFINITY` for a continuous drive).
pub fn ideal(eta: [f64; 3], rabi_over_tau: f64, t0: f64, convention: RateConvention) -> SystemConfig {
    let mut cfg = SystemConfig::dimensionless(real_eta(eta));
    cfg.drive = PulseSpec { omega_d: IDEAL_OMEGA_OVER_TAU, rabi: rabi_over_tau, t0 };
    cfg.rate_convention = convention;
    cfg
}

/// Qubit, resonator and magnon mode with their intrinsic losses, in rad/μs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridParams {
    pub tau_over_2pi_mhz: f64,
    pub omega_over_2pi_ghz: f64,
    pub gamma_sigma_inv_us: f64,
    pub gamma_a_inv_us: f64,
    pub gamma_b_inv_us: f64,
    pub gamma_phi_inv_us: f64,
}

impl Default for HybridParams {
    fn default() -> Self {
        Self {
            tau_over_2pi_mhz: 20.0,
            omega_over_2pi_ghz: 5.0,
            gamma_sigma_inv_us: 60.0,
            gamma_a_inv_us: 60.0,
            gamma_b_inv_us: 5.0,
            gamma_phi_inv_us: 25.0,
        }
    }
}

impl HybridParams {
    pub fn with_gamma_b_inv(mut self, us: f64) -> Self {
        self.gamma_b_inv_us = us;
        self
    }

    pub fn with_tau_mhz(mut self, mhz: f64) -> Self {
        self.tau_over_2pi_mhz = mhz;
        self
    }

    pub fn tau(&self) -> f64 {
        TAU * self.tau_over_2pi_mhz
    }

    /// Configuration with the drive off; set `drive.rabi`/`drive.t0` afterwards.
    pub fn config(&self, eta: [f64; 3], convention: RateConvention) -> SystemConfig {
        let omega = TAU * 1000.0 * self.omega_over_2pi_ghz;
        let inv = |us: f64| if us.is_infinite() { 0.0 } else { 1.0 / us };
        SystemConfig {
            omega_sigma: omega,
            omega_a: omega,
            omega_b: omega,
            tau: self.tau(),
            eta_sigma: C64::new(eta[0], 0.0),
            eta_a: C64::new(eta[1], 0.0),
            eta_b: C64::new(eta[2], 0.0),
            drive: PulseSpec::continuous(omega, 0.0),
            gamma_sigma: inv(self.gamma_sigma_inv_us),
            gamma_a: inv(self.gamma_a_inv_us),
            gamma_b: inv(self.gamma_b_inv_us),
            gamma_phi: inv(self.gamma_phi_inv_us),
            n_max: 2,
            unit_mode: UnitMode::Physical,
            rate_convention: convention,
            rtol: SystemConfig::DEFAULT_RTOL,
            atol: SystemConfig::DEFAULT_ATOL,
        }
    }

    /// As [`Self::config`] with a pulse of `rabi_over_tau · τ` lasting `t0_us`.
    pub fn pulsed(&self, eta: [f64; 3], rabi_over_tau: f64, t0_us: f64, convention: RateConvention) -> SystemConfig {
        let mut cfg = self.config(eta, convention);
        cfg.drive.rabi = rabi_over_tau * cfg.tau;
        cfg.drive.t0 = t0_us;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_config;

    #[test]
    fn hybrid_units() {
        let cfg = HybridParams::default().config(PROTOTYPE_ETA, RateConvention::Coefficient);
        assert!((cfg.tau - 125.66370614359172).abs() < 1e-12);
        assert!((cfg.gamma_phi - 0.04).abs() < 1e-15);
        assert!((cfg.gamma_b - 0.2).abs() < 1e-15);
        cfg.validate().unwrap();
        assert!(validate_config(&cfg).is_empty());
    }

    #[test]
    fn ideal_is_clean() {
        let cfg = ideal(PROTOTYPE_ETA, 0.01, f64::INFINITY, RateConvention::Coefficient);
        assert!(validate_config(&cfg).is_empty());
        assert!(!cfg.has_intrinsic_loss());
    }
}
