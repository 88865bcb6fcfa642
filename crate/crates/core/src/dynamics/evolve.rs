use std::ops::ControlFlow;

use crate::model::{Frame, SystemConfig};
use crate::spectral::StateVector;

use super::generator::Generator;
use super::integrator::{Dp45, StepControl, StepFailure, StepStats};
use super::state::{check_state, fidelity_raw, DensityMatrix, Diagnostics};
use super::DynamicsError;

/// Default number of output samples per run.
pub const DEFAULT_SAMPLES: usize = 2000;

/// Default cap on integrator steps per run. The longest lab-frame runs need
/// a few million.
pub const DEFAULT_MAX_STEPS: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub frame: Frame,
    /// Replace the collective jump `o` by the number-operator jump `O`.
    pub dephasing_reservoir: bool,
    /// `None` uses adaptive control with the configured tolerances.
    pub control: Option<StepControl>,
    /// Accepted plus rejected steps allowed per run.
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { frame: Frame::RotatingAtDrive, dephasing_reservoir: false, control: None, max_steps: DEFAULT_MAX_STEPS }
    }
}

impl EvolveOptions {
    pub fn with_frame(frame: Frame) -> Self {
        Self { frame, ..Self::default() }
    }
}

/// State handed to a sample visitor.
pub struct Sample<'a> {
    pub index: usize,
    pub t: f64,
    pub rho: &'a DensityMatrix,
    pub diagnostics: Diagnostics,
}

/// `n` uniformly spaced samples over `[0, t_end]`, both ends included.
pub fn uniform_grid(t_end: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| if i + 1 == n { t_end } else { t_end * i as f64 / (n - 1) as f64 }).collect()
}

fn check_grid(times: &[f64], start: f64) -> Result<(), DynamicsError> {
    match times.first() {
        None => return Err(DynamicsError::BadGrid("empty time grid".into())),
        Some(&t) if t != start => {
            return Err(DynamicsError::BadGrid(format!("grid must start at {start}, starts at {t}")))
        }
        _ => {}
    }
    if let Some(w) = times.windows(2).find(|w| w[1] <= w[0] || !w[1].is_finite()) {
        return Err(DynamicsError::BadGrid(format!("grid not strictly increasing at {} -> {}", w[0], w[1])));
    }
    Ok(())
}

/// Integrates the master equation over `times`, calling `visit` at every
/// sample (including `t = 0`). Aborts if the state breaks an invariant.
/// Returning `ControlFlow::Break` from `visit` stops early.
pub fn propagate<F>(
    rho0: &DensityMatrix,
    cfg: &SystemConfig,
    times: &[f64],
    opts: &EvolveOptions,
    visit: F,
) -> Result<StepStats, DynamicsError>
where
    F: FnMut(&Sample<'_>) -> Result<ControlFlow<()>, DynamicsError>,
{
    propagate_from(rho0, 0.0, cfg, times, opts, visit)
}

/// As [`propagate`], but starting from `rho_start` at time `t_start`; `times`
/// must begin at `t_start`. Used to resume a run from a saved sample.
pub fn propagate_from<F>(
    rho_start: &DensityMatrix,
    t_start: f64,
    cfg: &SystemConfig,
    times: &[f64],
    opts: &EvolveOptions,
    mut visit: F,
) -> Result<StepStats, DynamicsError>
where
    F: FnMut(&Sample<'_>) -> Result<ControlFlow<()>, DynamicsError>,
{
    cfg.validate()?;
    check_grid(times, t_start)?;
    let layout = cfg.layout();
    if rho_start.layout() != layout {
        return Err(DynamicsError::LayoutMismatch { expected: layout.dim(), found: rho_start.layout().dim() });
    }

    let t0 = cfg.drive.t0;
    let control = opts.control.unwrap_or(StepControl::Adaptive { rtol: cfg.rtol, atol: cfg.atol });
    let mut rho = rho_start.clone();
    let n = layout.dim() * layout.dim();
    let mut stepper = Dp45::new(control, n).with_budget(opts.max_steps);
    let mut driven = t_start < t0;
    let mut gen = Generator::new(cfg, opts.frame, opts.dephasing_reservoir, driven);

    let mut t = t_start;
    for (index, &t_next) in times.iter().enumerate() {
        if driven && t_next > t0 {
            advance(&mut stepper, &mut gen, t, t0, &mut rho)?;
            t = t0;
            driven = false;
            gen = Generator::new(cfg, opts.frame, opts.dephasing_reservoir, false);
            stepper.reset();
        }
        advance(&mut stepper, &mut gen, t, t_next, &mut rho)?;
        t = t_next;

        let diagnostics = check_state(&rho)?;
        if let Some((quantity, value)) = diagnostics.violation() {
            return Err(DynamicsError::InvariantViolation { t, quantity, value });
        }
        if visit(&Sample { index, t, rho: &rho, diagnostics })?.is_break() {
            break;
        }
    }
    Ok(stepper.stats)
}

fn advance(
    stepper: &mut Dp45,
    gen: &mut Generator,
    t: f64,
    t_end: f64,
    rho: &mut DensityMatrix,
) -> Result<(), DynamicsError> {
    let mut rhs = |t: f64, y: &[_], out: &mut [_]| gen.apply(t, y, out);
    let y = rho.matrix_mut().as_mut_slice();
    stepper.advance(t, t_end, y, &mut rhs).map_err(|f| match f {
        StepFailure::Underflow { t, h } => DynamicsError::StepUnderflow { t, h },
        StepFailure::Budget { t, steps } => DynamicsError::StepBudget { t, steps },
    })?;
    if !rho.matrix().is_finite() {
        return Err(DynamicsError::InvariantViolation { t: t_end, quantity: "non-finite entry", value: f64::NAN });
    }
    Ok(())
}

/// Fidelity and diagnostics sampled along one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// `(P_e00, P_g10, P_g01, P_g00)` per sample.
    pub populations: Vec<[f64; 4]>,
    pub trace_error: Vec<f64>,
    pub min_eigenvalue: Vec<f64>,
    pub purity: Vec<f64>,
    pub hermiticity_error: Vec<f64>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_fidelity(&self) -> Option<f64> {
        self.fidelity.last().copied()
    }

    fn push(&mut self, s: &Sample<'_>, f: f64) {
        self.times.push(s.t);
        self.fidelity.push(f);
        self.populations.push(s.rho.populations());
        self.trace_error.push(s.diagnostics.trace_error);
        self.min_eigenvalue.push(s.diagnostics.min_eigenvalue);
        self.purity.push(s.diagnostics.purity);
        self.hermiticity_error.push(s.diagnostics.hermiticity_error);
    }

    pub fn max_trace_error(&self) -> f64 {
        self.trace_error.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Fidelity trajectory `Tr(ρ(t)|target⟩⟨target|)` over `t_grid`.
pub fn evolve(
    rho0: &DensityMatrix,
    cfg: &SystemConfig,
    target: &StateVector,
    t_grid: &[f64],
    frame: Frame,
) -> Result<Trajectory, DynamicsError> {
    evolve_with(rho0, cfg, target, t_grid, &EvolveOptions::with_frame(frame))
}

pub fn evolve_with(
    rho0: &DensityMatrix,
    cfg: &SystemConfig,
    target: &StateVector,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory, DynamicsError> {
    if target.layout() != cfg.layout() {
        return Err(DynamicsError::LayoutMismatch { expected: cfg.layout().dim(), found: target.layout().dim() });
    }
    if (target.norm() - 1.0).abs() > 1e-9 {
        return Err(DynamicsError::InvalidState { quantity: "target norm", value: target.norm() });
    }
    let mut traj = Trajectory::default();
    let stats = propagate(rho0, cfg, t_grid, opts, |s| {
        let f = fidelity_raw(s.rho.matrix().as_slice(), target.amplitudes())?;
        traj.push(s, f);
        Ok(ControlFlow::Continue(()))
    })?;
    traj.stats = stats;
    Ok(traj)
}

/// Density matrices at each of `times`.
pub fn states_at(
    rho0: &DensityMatrix,
    cfg: &SystemConfig,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<DensityMatrix>, DynamicsError> {
    let mut out = Vec::with_capacity(times.len());
    propagate(rho0, cfg, times, opts, |s| {
        out.push(s.rho.clone());
        Ok(ControlFlow::Continue(()))
    })?;
    Ok(out)
}
