//! Scenario runners: stability runs, fidelity traces, peak extraction, drive
//! optimization under intrinsic loss and the parameter sweeps built on it.

mod convergence;
mod optimize;
mod peak;
pub mod presets;
mod reproduce;

use thiserror::Error;

use crate::dynamics::{evolve_with, uniform_grid, DensityMatrix, DynamicsError, EvolveOptions, Trajectory};
use crate::model::{ModelError, SystemConfig};
use crate::spectral::{dark_bright_states, SpectralError, StateVector};

pub use convergence::{converge_n_max, Convergence, CONVERGENCE_TOL, MAX_ESCALATION};
pub use optimize::{
    optimize_drive, sweep_deviation, sweep_drive, sweep_tau, DeviationChannel, OptimizationResult, DEFAULT_BRACKET,
    DEFAULT_GRID_POINTS, GOLDEN_REL_WIDTH,
};
pub use peak::{find_first_peak, measure_peak, PeakKind, PeakResult, PeakSearch, HORIZON_CONSTANT, PLATEAU_TOL, RISE_THRESHOLD};
pub use reproduce::{reproduce, FigureId, ReproduceOptions, ReproduceOutput, Series};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("fidelity never exceeds {threshold:e} (max {max:e})", threshold = RISE_THRESHOLD)]
    NoRise { max: f64 },
    #[error("no intrinsic loss: the peak fidelity decreases monotonically with the drive, so there is no interior optimum")]
    Lossless,
    #[error("optimum at the {edge} edge of the drive bracket (Ω_d = {rabi}); widen the bracket")]
    BracketEdge { rabi: f64, edge: &'static str },
    #[error("{0}")]
    Precondition(String),
    #[error("at {param} = {value}: {source}")]
    AtPoint { param: &'static str, value: f64, source: Box<ExperimentError> },
    #[error("fidelity did not converge in n_max up to {n_max} (last shift {shift:e})")]
    NotConverged { n_max: usize, shift: f64 },
    #[error("unknown figure id '{0}'")]
    UnknownFigure(String),
    #[error(transparent)]
    Io(#[from] crate::io::IoError),
}

impl ExperimentError {
    pub(crate) fn at(param: &'static str, value: f64) -> impl FnOnce(ExperimentError) -> ExperimentError {
        move |e| ExperimentError::AtPoint { param, value, source: Box::new(e) }
    }

    /// Underlying error with any point tags removed.
    pub fn root(&self) -> &ExperimentError {
        match self {
            ExperimentError::AtPoint { source, .. } => source.root(),
            e => e,
        }
    }

    /// Numerical failure (as opposed to bad input or configuration).
    pub fn is_numerical(&self) -> bool {
        match self.root() {
            ExperimentError::Dynamics(e) => e.is_numerical(),
            ExperimentError::NoRise { .. } | ExperimentError::NotConverged { .. } => true,
            _ => false,
        }
    }
}

/// Which state of the one-excitation decomposition starts a stability run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityInitial {
    D1,
    D2,
    Bright,
}

impl StabilityInitial {
    pub const ALL: [StabilityInitial; 3] = [StabilityInitial::D1, StabilityInitial::D2, StabilityInitial::Bright];

    pub fn as_str(self) -> &'static str {
        match self {
            StabilityInitial::D1 => "D1",
            StabilityInitial::D2 => "D2",
            StabilityInitial::Bright => "B",
        }
    }
}

/// Undriven, lossless run from `initial`, with the fidelity taken against itself.
pub fn run_stability(
    cfg: &SystemConfig,
    initial: StabilityInitial,
    horizon: f64,
    samples: usize,
    opts: &EvolveOptions,
) -> Result<Trajectory, ExperimentError> {
    if cfg.drive.rabi != 0.0 {
        return Err(ExperimentError::Precondition("stability runs take an undriven system".into()));
    }
    if cfg.has_intrinsic_loss() {
        return Err(ExperimentError::Precondition("stability runs take a system without intrinsic loss".into()));
    }
    let dec = dark_bright_states(cfg)?;
    let psi = match initial {
        StabilityInitial::D1 => dec.d1,
        StabilityInitial::D2 => dec.d2,
        StabilityInitial::Bright => dec.bright,
    };
    let rho0 = DensityMatrix::pure(&psi)?;
    Ok(evolve_with(&rho0, cfg, &psi, &uniform_grid(horizon, samples), opts)?)
}

/// Driven run from `|g00⟩` with the configured pulse.
pub fn run_fidelity_trace(
    cfg: &SystemConfig,
    target: &StateVector,
    horizon: f64,
    samples: usize,
    opts: &EvolveOptions,
) -> Result<Trajectory, ExperimentError> {
    let rho0 = DensityMatrix::vacuum(cfg.layout());
    Ok(evolve_with(&rho0, cfg, target, &uniform_grid(horizon, samples), opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RateConvention;

    #[test]
    fn stability_runs() {
        let cfg = presets::ideal(presets::SYMMETRIC_ETA, 0.0, f64::INFINITY, RateConvention::Coefficient);
        let opts = EvolveOptions::default();
        for init in [StabilityInitial::D1, StabilityInitial::D2] {
            let tr = run_stability(&cfg, init, 5.0, 51, &opts).unwrap();
            assert!(tr.fidelity.iter().all(|f| (f - 1.0).abs() < 1e-7));
        }
        let tr = run_stability(&cfg, StabilityInitial::Bright, 5.0, 51, &opts).unwrap();
        for (t, f) in tr.times.iter().zip(&tr.fidelity) {
            assert!((f - (-6.0 * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn stability_preconditions() {
        let mut cfg = presets::ideal(presets::SYMMETRIC_ETA, 0.01, f64::INFINITY, RateConvention::Coefficient);
        let opts = EvolveOptions::default();
        assert!(matches!(run_stability(&cfg, StabilityInitial::D1, 1.0, 3, &opts), Err(ExperimentError::Precondition(_))));
        cfg.drive.rabi = 0.0;
        cfg.gamma_b = 0.1;
        assert!(matches!(run_stability(&cfg, StabilityInitial::D1, 1.0, 3, &opts), Err(ExperimentError::Precondition(_))));
    }

    #[test]
    fn point_tags_unwrap() {
        let e = ExperimentError::at("rabi", 0.1)(ExperimentError::NoRise { max: 0.0 });
        assert!(e.to_string().starts_with("at rabi = 0.1"));
        assert!(matches!(e.root(), ExperimentError::NoRise { .. }));
        assert!(e.is_numerical());
    }
}
