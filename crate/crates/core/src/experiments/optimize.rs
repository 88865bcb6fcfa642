use rayon::prelude::*;

use crate::dynamics::EvolveOptions;
use crate::model::SystemConfig;
use crate::spectral::StateVector;

use super::peak::{measure_peak, PeakResult, PeakSearch};
use super::ExperimentError;

/// Default drive bracket in units of τ.
pub const DEFAULT_BRACKET: (f64, f64) = (0.002, 0.2);
pub const DEFAULT_GRID_POINTS: usize = 16;
/// Golden-section search stops once the bracket is this narrow relative to its centre.
pub const GOLDEN_REL_WIDTH: f64 = 1e-3;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    /// Optimal Rabi frequency, in the configuration's units.
    pub rabi_opt: f64,
    pub f_opt: f64,
    pub t_opt: f64,
    /// Peak measurements performed, coarse grid included.
    pub evaluations: usize,
    /// Coarse grid as `(rabi, peak)`.
    pub grid: Vec<(f64, PeakResult)>,
}

/// Per-drive first-peak fidelity and time, with `t0 = ∞` for every run.
/// Runs in parallel; the output follows the input order.
pub fn sweep_drive(
    cfg: &SystemConfig,
    target: &StateVector,
    rabi_values: &[f64],
    opts: &EvolveOptions,
    search: &PeakSearch,
) -> Result<Vec<(f64, PeakResult)>, ExperimentError> {
    rabi_values
        .par_iter()
        .map(|&r| {
            peak_at(cfg, target, r, opts, search).map(|p| (r, p)).map_err(ExperimentError::at("rabi", r))
        })
        .collect()
}

fn peak_at(
    cfg: &SystemConfig,
    target: &StateVector,
    rabi: f64,
    opts: &EvolveOptions,
    search: &PeakSearch,
) -> Result<PeakResult, ExperimentError> {
    let mut c = cfg.clone();
    c.drive.rabi = rabi;
    measure_peak(&c, target, opts, search)
}

/// Drive strength maximizing the first-peak fidelity.
///
/// `bracket` is given in units of τ. A log-spaced coarse grid locates the
/// best interval, golden-section search in `ln Ω_d` narrows it, and the best
/// evaluation seen overall is returned.
pub fn optimize_drive(
    cfg: &SystemConfig,
    target: &StateVector,
    bracket: (f64, f64),
    grid_points: usize,
    opts: &EvolveOptions,
    search: &PeakSearch,
) -> Result<OptimizationResult, ExperimentError> {
    if !cfg.has_intrinsic_loss() {
        return Err(ExperimentError::Lossless);
    }
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || grid_points < 3 {
        return Err(ExperimentError::Precondition(format!(
            "drive bracket ({lo}, {hi}) with {grid_points} points is not a valid log grid"
        )));
    }
    let (ln_lo, ln_hi) = ((lo * cfg.tau).ln(), (hi * cfg.tau).ln());
    let step = (ln_hi - ln_lo) / (grid_points - 1) as f64;
    let rabis: Vec<f64> = (0..grid_points).map(|k| (ln_lo + k as f64 * step).exp()).collect();
    let grid = sweep_drive(cfg, target, &rabis, opts, search)?;

    let best = (0..grid.len()).fold(0, |b, i| if grid[i].1.f_max > grid[b].1.f_max { i } else { b });
    if best == 0 || best + 1 == grid.len() {
        let edge = if best == 0 { "lower" } else { "upper" };
        return Err(ExperimentError::BracketEdge { rabi: grid[best].0, edge });
    }

    let mut evaluations = grid.len();
    let mut top = grid[best];
    let mut eval = |x: f64| -> Result<f64, ExperimentError> {
        let r = x.exp();
        let p = peak_at(cfg, target, r, opts, search).map_err(ExperimentError::at("rabi", r))?;
        evaluations += 1;
        if p.f_max > top.1.f_max {
            top = (r, p);
        }
        Ok(p.f_max)
    };

    let (mut a, mut b) = (grid[best - 1].0.ln(), grid[best + 1].0.ln());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while (b.exp() - a.exp()) / (0.5 * (a + b)).exp() >= GOLDEN_REL_WIDTH {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }

    let (rabi_opt, peak) = top;
    Ok(OptimizationResult { rabi_opt, f_opt: peak.f_max, t_opt: peak.t_max, evaluations, grid })
}

/// Re-optimizes the drive at each cooperative rate `τ`.
pub fn sweep_tau(
    cfg: &SystemConfig,
    target: &StateVector,
    tau_values: &[f64],
    bracket: (f64, f64),
    opts: &EvolveOptions,
    search: &PeakSearch,
) -> Result<Vec<(f64, OptimizationResult)>, ExperimentError> {
    tau_values
        .par_iter()
        .map(|&tau| {
            let mut c = cfg.clone();
            c.tau = tau;
            optimize_drive(&c, target, bracket, DEFAULT_GRID_POINTS, opts, search)
                .map(|r| (tau, r))
                .map_err(ExperimentError::at("tau", tau))
        })
        .collect()
}

/// Coupling component scaled in a deviation sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeviationChannel {
    Qubit,
    Resonator,
    Magnon,
}

impl DeviationChannel {
    pub const ALL: [DeviationChannel; 3] = [DeviationChannel::Qubit, DeviationChannel::Resonator, DeviationChannel::Magnon];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DeviationChannel::Qubit => "qubit",
            DeviationChannel::Resonator => "resonator",
            DeviationChannel::Magnon => "magnon",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

/// Scales one coupling by `1 + δ`, re-optimizes the drive and scores the
/// result against the fixed `target`.
pub fn sweep_deviation(
    cfg: &SystemConfig,
    target: &StateVector,
    which: DeviationChannel,
    deltas: &[f64],
    bracket: (f64, f64),
    opts: &EvolveOptions,
    search: &PeakSearch,
) -> Result<Vec<(f64, OptimizationResult)>, ExperimentError> {
    deltas
        .par_iter()
        .map(|&delta| {
            let mut c = cfg.clone();
            let mut eta = c.eta();
            eta[which.index()] *= 1.0 + delta;
            c.set_eta(eta);
            optimize_drive(&c, target, bracket, DEFAULT_GRID_POINTS, opts, search)
                .map(|r| (delta, r))
                .map_err(ExperimentError::at("delta", delta))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::presets::{ideal, PROTOTYPE_ETA};
    use crate::model::RateConvention;
    use crate::spectral::target_dark_state;

    #[test]
    fn lossless_is_refused() {
        let cfg = ideal(PROTOTYPE_ETA, 0.01, f64::INFINITY, RateConvention::Coefficient);
        let target = target_dark_state(&cfg).unwrap().state;
        let r = optimize_drive(&cfg, &target, DEFAULT_BRACKET, 16, &EvolveOptions::default(), &PeakSearch::default());
        assert!(matches!(r, Err(ExperimentError::Lossless)));
    }

    #[test]
    fn bad_bracket() {
        let mut cfg = ideal(PROTOTYPE_ETA, 0.01, f64::INFINITY, RateConvention::Coefficient);
        cfg.gamma_b = 0.01;
        let target = target_dark_state(&cfg).unwrap().state;
        let r = optimize_drive(&cfg, &target, (0.1, 0.01), 16, &EvolveOptions::default(), &PeakSearch::default());
        assert!(matches!(r, Err(ExperimentError::Precondition(_))));
    }

    #[test]
    fn channel_names() {
        for c in DeviationChannel::ALL {
            assert_eq!(DeviationChannel::parse(c.as_str()), Some(c));
        }
        assert_eq!(DeviationChannel::Magnon.index(), 2);
    }
}
