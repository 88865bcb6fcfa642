//! The physical model: Hamiltonians, the collective jump operator, intrinsic
//! dissipation channels and the master-equation right-hand side.

mod config;
mod liouvillian;
mod operators;

use std::fmt;

use thiserror::Error;

pub use config::{Frame, PulseSpec, RateConvention, SystemConfig, UnitMode, MAX_N_MAX};
pub use liouvillian::{build_channels, liouvillian_apply, Channel, ChannelForm};
pub use operators::{
    build_dephasing_jump, build_hamiltonian, build_jump_operator, build_mode_operators, effective_hamiltonian,
    ModeOperators,
};
pub(crate) use operators::hamiltonian_from;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("dimension mismatch: expected {expected}x{expected}, found {found:?}")]
    Dimension { expected: usize, found: (usize, usize) },
}

/// Relative detuning above which the near-resonance condition is flagged.
pub const RESONANCE_TOLERANCE: f64 = 0.05;
/// Largest `|η_α|² τ / ω₀` considered weak coupling.
pub const COUPLING_LIMIT: f64 = 0.2;
/// Largest `Ω_d / τ` considered a weak drive.
pub const DRIVE_LIMIT: f64 = 0.2;

/// A validity condition of the master equation that the configuration
/// violates. Simulation still proceeds.
#[derive(Clone, Debug, PartialEq)]
pub enum ValidityWarning {
    NotNearResonant { mode: &'static str, relative_detuning: f64 },
    StrongCoupling { ratio: f64 },
    StrongDrive { ratio: f64 },
}

impl fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityWarning::NotNearResonant { mode, relative_detuning } => write!(
                f,
                "{mode} is detuned from the qubit by {:.3}% (> {:.0}%): near-resonance condition violated",
                relative_detuning * 100.0,
                RESONANCE_TOLERANCE * 100.0
            ),
            ValidityWarning::StrongCoupling { ratio } => write!(
                f,
                "max |eta|^2 tau / omega0 = {ratio:.3} exceeds {COUPLING_LIMIT}: weak-coupling condition violated"
            ),
            ValidityWarning::StrongDrive { ratio } => {
                write!(f, "Omega_d / tau = {ratio:.3} exceeds {DRIVE_LIMIT}: weak-drive condition violated")
            }
        }
    }
}

/// Checks the near-resonance, weak-coupling and weak-drive conditions.
pub fn validate_config(cfg: &SystemConfig) -> Vec<ValidityWarning> {
    let mut warnings = Vec::new();
    let w0 = cfg.omega_sigma;
    for (mode, w) in [("resonator a", cfg.omega_a), ("resonator b", cfg.omega_b)] {
        let detuning = (w - w0).abs();
        let relative = if w0 > 0.0 { detuning / w0 } else if detuning > 0.0 { f64::INFINITY } else { 0.0 };
        if relative > RESONANCE_TOLERANCE {
            warnings.push(ValidityWarning::NotNearResonant { mode, relative_detuning: relative });
        }
    }
    let max_eta = cfg.eta().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let coupling = if w0 > 0.0 { max_eta * cfg.tau / w0 } else { f64::INFINITY };
    if coupling > COUPLING_LIMIT {
        warnings.push(ValidityWarning::StrongCoupling { ratio: coupling });
    }
    let drive = cfg.drive.rabi / cfg.tau;
    if drive > DRIVE_LIMIT {
        warnings.push(ValidityWarning::StrongDrive { ratio: drive });
    }
    warnings
}
