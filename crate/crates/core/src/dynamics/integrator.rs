//! Dormand–Prince 5(4) with FSAL and either adaptive or fixed steps.

use crate::qlinalg::C64;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepControl {
    Adaptive { rtol: f64, atol: f64 },
    /// Equal steps no longer than `dt`, shortened to land on sample times.
    Fixed { dt: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum StepFailure {
    Underflow { t: f64, h: f64 },
    /// Accepted plus rejected steps reached the budget.
    Budget { t: f64, steps: usize },
}

pub(crate) struct Dp45 {
    control: StepControl,
    h: Option<f64>,
    /// Derivative at the current point, reused by the next step.
    fsal: Option<Vec<C64>>,
    k: Vec<Vec<C64>>,
    y_stage: Vec<C64>,
    y_new: Vec<C64>,
    pub stats: StepStats,
    max_steps: usize,
}

impl Dp45 {
    pub(crate) fn new(control: StepControl, n: usize) -> Self {
        Self {
            control,
            h: None,
            fsal: None,
            k: vec![vec![C64::new(0.0, 0.0); n]; 7],
            y_stage: vec![C64::new(0.0, 0.0); n],
            y_new: vec![C64::new(0.0, 0.0); n],
            stats: StepStats::default(),
            max_steps: usize::MAX,
        }
    }

    pub(crate) fn with_budget(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    fn check_budget(&self, t: f64) -> Result<(), StepFailure> {
        let steps = self.stats.accepted + self.stats.rejected;
        if steps >= self.max_steps {
            return Err(StepFailure::Budget { t, steps });
        }
        Ok(())
    }

    /// Forget the cached derivative; needed when the right-hand side changes.
    pub(crate) fn reset(&mut self) {
        self.fsal = None;
    }

    /// Integrates `y` from `t` to exactly `t_end`.
    pub(crate) fn advance<F>(&mut self, t: f64, t_end: f64, y: &mut [C64], rhs: &mut F) -> Result<(), StepFailure>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let mut t = t;
        if t_end <= t {
            return Ok(());
        }
        if self.fsal.is_none() {
            let mut k0 = vec![C64::new(0.0, 0.0); y.len()];
            rhs(t, y, &mut k0);
            self.stats.rhs_evals += 1;
            self.fsal = Some(k0);
        }
        match self.control {
            StepControl::Fixed { dt } => {
                let span = t_end - t;
                let n = (span / dt - 1e-9).ceil().max(1.0) as usize;
                let h = span / n as f64;
                for i in 0..n {
                    self.check_budget(t)?;
                    self.step(t, h, y, rhs);
                    self.accept(y);
                    t = if i + 1 == n { t_end } else { t + h };
                }
                Ok(())
            }
            StepControl::Adaptive { rtol, atol } => {
                let mut h = match self.h {
                    Some(h) => h,
                    None => self.initial_step(t, y, rtol, atol, rhs),
                };
                loop {
                    let remaining = t_end - t;
                    let last = h >= remaining * (1.0 - 1e-12);
                    let h_try = if last { remaining } else { h };
                    if h_try <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                        return Err(StepFailure::Underflow { t, h: h_try });
                    }
                    self.check_budget(t)?;
                    self.step(t, h_try, y, rhs);
                    let err_norm = self.error_norm(y, rtol, atol);
                    if err_norm <= 1.0 {
                        self.accept(y);
                        t = if last { t_end } else { t + h_try };
                        let factor = if err_norm == 0.0 {
                            MAX_FACTOR
                        } else {
                            (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                        };
                        // A step truncated to hit t_end says little about the
                        // natural step size; keep the previous one.
                        if !last || h_try >= h {
                            h = h_try * factor;
                        }
                        if last {
                            self.h = Some(h);
                            return Ok(());
                        }
                    } else {
                        self.stats.rejected += 1;
                        h = h_try * (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                    }
                }
            }
        }
    }

    /// Hairer–Nørsett–Wanner starting step.
    fn initial_step<F>(&mut self, t: f64, y: &[C64], rtol: f64, atol: f64, rhs: &mut F) -> f64
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let f0 = self.fsal.as_ref().expect("derivative cached");
        let scale: Vec<f64> = y.iter().map(|z| atol + rtol * z.norm()).collect();
        let rms = |v: &[C64]| (v.iter().zip(&scale).map(|(z, s)| (z.norm() / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
        let d0 = rms(y);
        let d1 = rms(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: Vec<C64> = y.iter().zip(f0).map(|(a, b)| a + b * h0).collect();
        let mut f1 = vec![C64::new(0.0, 0.0); y.len()];
        rhs(t + h0, &y1, &mut f1);
        self.stats.rhs_evals += 1;
        let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| (a - b) / h0).collect();
        let d2 = rms(&diff);
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1)
    }

    /// One trial step; leaves the candidate in `y_new` and the error estimate
    /// in `k[1]` (stage 2 is unused after the step).
    fn step<F>(&mut self, t: f64, h: f64, y: &[C64], rhs: &mut F)
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let k0 = self.fsal.as_ref().expect("derivative cached");
        self.k[0].copy_from_slice(k0);
        for s in 1..7 {
            for (i, (stage, y0)) in self.y_stage.iter_mut().zip(y).enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (j, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += self.k[j][i] * *a;
                    }
                }
                *stage = y0 + acc * h;
            }
            rhs(t + C[s] * h, &self.y_stage, &mut self.k[s]);
            self.stats.rhs_evals += 1;
        }
        // Stage 7 is evaluated at the fifth-order solution (FSAL).
        self.y_new.copy_from_slice(&self.y_stage);
        for i in 0..y.len() {
            let mut e = C64::new(0.0, 0.0);
            for (j, w) in E.iter().enumerate() {
                if *w != 0.0 {
                    e += self.k[j][i] * *w;
                }
            }
            self.k[1][i] = e * h;
        }
    }

    /// Max-norm of the scaled error. An RMS norm would dilute the error over
    /// the many structurally zero entries of ρ.
    fn error_norm(&self, y: &[C64], rtol: f64, atol: f64) -> f64 {
        y.iter()
            .zip(&self.y_new)
            .zip(&self.k[1])
            .map(|((a, b), e)| e.norm() / (atol + rtol * a.norm().max(b.norm())))
            .fold(0.0, f64::max)
    }

    fn accept(&mut self, y: &mut [C64]) {
        y.copy_from_slice(&self.y_new);
        self.fsal.as_mut().expect("derivative cached").copy_from_slice(&self.k[6]);
        self.stats.accepted += 1;
    }
}
