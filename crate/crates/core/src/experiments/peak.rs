use std::ops::ControlFlow;

use crate::dynamics::{propagate, propagate_from, DensityMatrix, EvolveOptions};
use crate::model::SystemConfig;
use crate::spectral::StateVector;

use super::ExperimentError;

/// Fidelity below this counts as "never rose".
pub const RISE_THRESHOLD: f64 = 1e-6;
/// Plateau samples within this of the supremum are equivalent.
pub const PLATEAU_TOL: f64 = 1e-6;
/// `τ t_max ≈ HORIZON_CONSTANT / (Ω_d/τ)` holds across the drive range of
/// interest; it seeds the sampling horizon.
pub const HORIZON_CONSTANT: f64 = 2.72;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeakKind {
    /// A strict first local maximum.
    LocalMax,
    /// No strict maximum: earliest sample within `PLATEAU_TOL` of the supremum.
    Plateau,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakResult {
    pub t_max: f64,
    pub f_max: f64,
    pub kind: PeakKind,
}

/// First local maximum of `values` sampled at `times`, or the plateau point
/// when the trace has no strict local maximum.
pub fn find_first_peak(times: &[f64], values: &[f64]) -> Result<PeakResult, ExperimentError> {
    assert_eq!(times.len(), values.len(), "times and values differ in length");
    let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if sup.is_nan() || sup <= RISE_THRESHOLD {
        return Err(ExperimentError::NoRise { max: sup.max(0.0) });
    }
    if let Some(i) = first_local_max(values) {
        return Ok(PeakResult { t_max: times[i], f_max: values[i], kind: PeakKind::LocalMax });
    }
    let i = values.iter().position(|&f| f >= sup - PLATEAU_TOL).expect("supremum is attained");
    Ok(PeakResult { t_max: times[i], f_max: values[i], kind: PeakKind::Plateau })
}

/// Index `i` with `v[i-1] < v[i] >= v[i+1]`, ignoring values at noise level.
fn first_local_max(values: &[f64]) -> Option<usize> {
    (1..values.len().saturating_sub(1))
        .find(|&i| values[i] > RISE_THRESHOLD && values[i] > values[i - 1] && values[i] >= values[i + 1])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakSearch {
    /// Coarse samples per heuristic horizon.
    pub samples_per_horizon: usize,
    /// Give up looking for a maximum after this many heuristic horizons.
    pub max_horizons: f64,
    /// Grid refinement factor per pass.
    pub refine_factor: usize,
    /// Final time resolution relative to `t_max`.
    pub resolution: f64,
}

impl Default for PeakSearch {
    fn default() -> Self {
        Self { samples_per_horizon: 200, max_horizons: 10.0, refine_factor: 10, resolution: 1e-3 }
    }
}

/// First fidelity maximum of the run from `|g00⟩` with a continuous drive.
///
/// Samples on a coarse grid, stops at the first local maximum, then
/// re-simulates the bracketing interval on successively finer grids from the
/// saved state until the grid spacing is below `resolution · t_max`.
pub fn measure_peak(
    cfg: &SystemConfig,
    target: &StateVector,
    opts: &EvolveOptions,
    search: &PeakSearch,
) -> Result<PeakResult, ExperimentError> {
    let mut cfg = cfg.clone();
    cfg.drive.t0 = f64::INFINITY;
    if cfg.drive.rabi <= 0.0 {
        return Err(ExperimentError::NoRise { max: 0.0 });
    }
    let horizon = HORIZON_CONSTANT / cfg.drive.rabi;
    let dt = horizon / search.samples_per_horizon as f64;
    let n = (search.max_horizons * search.samples_per_horizon as f64).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();

    let mut times = Vec::new();
    let mut values = Vec::new();
    // States at the last three samples.
    let mut recent: Vec<DensityMatrix> = Vec::with_capacity(3);
    let rho0 = DensityMatrix::vacuum(cfg.layout());
    propagate(&rho0, &cfg, &grid, opts, |s| {
        times.push(s.t);
        values.push(crate::dynamics::fidelity(s.rho, target)?);
        if recent.len() == 3 {
            recent.remove(0);
        }
        recent.push(s.rho.clone());
        let k = values.len();
        let found = k >= 3 && first_local_max(&values[k - 3..]).is_some();
        Ok(if found { ControlFlow::Break(()) } else { ControlFlow::Continue(()) })
    })?;

    let coarse = find_first_peak(&times, &values)?;
    if coarse.kind == PeakKind::Plateau {
        return Ok(coarse);
    }
    // The maximum is the middle of the last three samples.
    let i = times.len() - 2;
    let mut best = coarse;
    let mut start_t = times[i - 1];
    let mut start_rho = recent.swap_remove(0);
    let mut spacing = dt;
    while spacing > search.resolution * best.t_max {
        let fine = spacing / search.refine_factor as f64;
        let m = 2 * search.refine_factor;
        let fine_grid: Vec<f64> = (0..=m).map(|k| start_t + k as f64 * fine).collect();
        let mut states = Vec::with_capacity(m + 1);
        let mut fv = Vec::with_capacity(m + 1);
        propagate_from(&start_rho, start_t, &cfg, &fine_grid, opts, |s| {
            fv.push(crate::dynamics::fidelity(s.rho, target)?);
            states.push(s.rho.clone());
            Ok(ControlFlow::Continue(()))
        })?;
        let j = argmax_first(&fv);
        best = PeakResult { t_max: fine_grid[j], f_max: fv[j], kind: PeakKind::LocalMax };
        let from = j.saturating_sub(1);
        start_t = fine_grid[from];
        start_rho = states.swap_remove(from);
        spacing = fine;
    }
    Ok(best)
}

fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
