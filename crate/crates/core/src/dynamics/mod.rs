//! Time evolution of the master equation, state diagnostics and fidelity.

mod evolve;
mod generator;
mod integrator;
mod oracle;
mod state;

use thiserror::Error;

use crate::model::ModelError;
use crate::qlinalg::LinalgError;

pub use evolve::{
    evolve, evolve_with, propagate, propagate_from, states_at, uniform_grid, EvolveOptions, Sample, Trajectory, DEFAULT_MAX_STEPS, DEFAULT_SAMPLES,
};
pub use integrator::{StepControl, StepStats};
pub use oracle::{liouvillian_supermatrix, oracle_propagate, oracle_states_at, MAX_ORACLE_DIM};
pub use state::{
    check_state, fidelity, DensityMatrix, Diagnostics, FIDELITY_IMAG_TOL, HERMITICITY_TOL, MIN_EIGENVALUE_TOL,
    TRACE_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("{quantity} = {value:e} at t = {t} breaks the density-matrix invariants")]
    InvariantViolation { t: f64, quantity: &'static str, value: f64 },
    #[error("invalid state: {quantity} = {value:e}")]
    InvalidState { quantity: &'static str, value: f64 },
    #[error("fidelity has imaginary residue {0:e}")]
    FidelityResidue(f64),
    #[error("layout mismatch: expected dimension {expected}, found {found}")]
    LayoutMismatch { expected: usize, found: usize },
    #[error("{0}")]
    BadGrid(String),
    #[error("step size underflow (h = {h:e}) at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("integrator step budget of {steps} exhausted at t = {t}")]
    StepBudget { t: f64, steps: usize },
    #[error("oracle supermatrix dimension {dim} exceeds {max}")]
    OracleTooLarge { dim: usize, max: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl DynamicsError {
    /// Whether the error reports a numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            DynamicsError::InvariantViolation { .. }
                | DynamicsError::FidelityResidue(_)
                | DynamicsError::StepUnderflow { .. }
                | DynamicsError::StepBudget { .. }
                | DynamicsError::Linalg(LinalgError::NoConvergence | LinalgError::Singular | LinalgError::NonFinite)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Frame, PulseSpec, SystemConfig};
    use crate::qlinalg::C64;
    use crate::spectral::{dark_bright_states, target_dark_state, StateVector};

    fn cfg(eta: [f64; 3]) -> SystemConfig {
        SystemConfig::dimensionless(eta.map(|x| C64::new(x, 0.0)))
    }

    #[test]
    fn vacuum_stays_put() {
        let c = cfg([2.0, -1.0, -1.0]);
        let target = target_dark_state(&c).unwrap().state;
        let tr = evolve(&DensityMatrix::vacuum(c.layout()), &c, &target, &uniform_grid(50.0, 11), Frame::RotatingAtDrive).unwrap();
        assert!(tr.fidelity.iter().all(|&f| f.abs() < 1e-15));
        assert!(tr.populations.iter().all(|p| (p[3] - 1.0).abs() < 1e-15));
    }

    #[test]
    fn dark_state_is_stable() {
        let c = cfg([1.0, 1.0, 1.0]);
        let dec = dark_bright_states(&c).unwrap();
        let tr = evolve(&DensityMatrix::pure(&dec.d1).unwrap(), &c, &dec.d1, &uniform_grid(20.0, 21), Frame::Lab).unwrap();
        assert!(tr.fidelity.iter().all(|&f| (f - 1.0).abs() < 1e-9));
    }

    #[test]
    fn bright_state_decay() {
        let c = cfg([1.0, 1.0, 1.0]);
        let b = dark_bright_states(&c).unwrap().bright;
        let grid = uniform_grid(0.5, 6);
        let tr = evolve(&DensityMatrix::pure(&b).unwrap(), &c, &b, &grid, Frame::RotatingAtDrive).unwrap();
        for (t, f) in grid.iter().zip(&tr.fidelity) {
            assert!((f - (-6.0 * t).exp()).abs() < 1e-8, "t={t} f={f}");
        }
        assert!((tr.final_fidelity().unwrap() - 0.0498).abs() < 1e-4);
    }

    #[test]
    fn single_channel_decay() {
        let c = cfg([1.0, 0.0, 0.0]);
        let e00 = StateVector::basis(c.layout(), 1, 0, 0);
        let grid = uniform_grid(2.0, 9);
        let tr = evolve(&DensityMatrix::pure(&e00).unwrap(), &c, &e00, &grid, Frame::RotatingAtDrive).unwrap();
        for (t, p) in grid.iter().zip(&tr.populations) {
            assert!((p[0] - (-2.0 * t).exp()).abs() < 1e-9, "{t} {}", p[0] - (-2.0 * t).exp());
        }
    }

    #[test]
    fn oracle_agrees_across_pulse_end() {
        let mut c = cfg([2.0, -1.0, -1.0]);
        c.drive = PulseSpec { omega_d: 500.0, rabi: 0.05, t0: 7.3 };
        let vac = DensityMatrix::vacuum(c.layout());
        let times = [0.0, 3.0, 7.3, 12.0];
        let states = states_at(&vac, &c, &times, &EvolveOptions::default()).unwrap();
        for (t, s) in times.iter().zip(&states) {
            let o = oracle_propagate(&vac, &c, *t, false).unwrap();
            assert!(o.matrix().max_abs_diff(s.matrix()) < 1e-8, "t={t}");
        }
    }

    #[test]
    fn bad_grids() {
        let c = cfg([1.0, 1.0, 1.0]);
        let vac = DensityMatrix::vacuum(c.layout());
        let t = StateVector::basis(c.layout(), 0, 0, 0);
        for g in [vec![], vec![1.0, 2.0], vec![0.0, 1.0, 1.0]] {
            assert!(matches!(evolve(&vac, &c, &t, &g, Frame::Lab), Err(DynamicsError::BadGrid(_))));
        }
    }

    #[test]
    fn early_stop() {
        let c = cfg([1.0, 1.0, 1.0]);
        let vac = DensityMatrix::vacuum(c.layout());
        let mut seen = 0;
        propagate(&vac, &c, &uniform_grid(1.0, 10), &EvolveOptions::default(), |s| {
            seen += 1;
            Ok(if s.index == 3 { std::ops::ControlFlow::Break(()) } else { std::ops::ControlFlow::Continue(()) })
        })
        .unwrap();
        assert_eq!(seen, 4);
    }
}
