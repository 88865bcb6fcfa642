//! Sparse evaluation of the master-equation right-hand side.

use crate::model::{build_channels, build_mode_operators, hamiltonian_from, ChannelForm, Frame, SystemConfig};
use crate::qlinalg::{ComplexMatrix, Operator, C64};

/// Nonzero entries of an operator, in row order.
#[derive(Clone, Debug)]
pub(crate) struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub(crate) fn from_dense(m: &ComplexMatrix) -> Self {
        let (dim, _) = m.shape();
        let mut entries = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                let v = m[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    entries.push((r, c, v));
                }
            }
        }
        Self { dim, entries }
    }

    /// `out += s · A · x` for row-major dense `x`.
    fn mul_dense_acc(&self, s: C64, x: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for &(r, c, v) in &self.entries {
            let w = s * v;
            let src = &x[c * d..(c + 1) * d];
            let dst = &mut out[r * d..(r + 1) * d];
            for (o, &xi) in dst.iter_mut().zip(src) {
                *o += w * xi;
            }
        }
    }
}

struct Jump {
    weight: f64,
    op: SparseOp,
}

/// `dρ/dt = −i(Kρ − ρK†) + Σ w JρJ†` with `K = H − i Σ c J†J`.
///
/// Evaluated as `A + A†` where `A = −iKρ + ½ Σ w J(Jρ)†`, which is exact for
/// Hermitian ρ and makes the output Hermitian by construction.
pub(crate) struct Generator {
    dim: usize,
    k_static: SparseOp,
    /// `Ω_d σ†`; present while the drive is on.
    drive_raise: Option<SparseOp>,
    drive_lower: Option<SparseOp>,
    /// Lab-frame drive frequency; `None` for a static drive term.
    lab_omega: Option<f64>,
    jumps: Vec<Jump>,
    scratch: Vec<C64>,
    scratch_t: Vec<C64>,
}

impl Generator {
    /// Generator on one pulse segment. `drive_on` selects whether the drive
    /// term is included.
    pub(crate) fn new(cfg: &SystemConfig, frame: Frame, dephasing_reservoir: bool, drive_on: bool) -> Self {
        let layout = cfg.layout();
        let dim = layout.dim();
        let ops = build_mode_operators(layout);
        let mut undriven = cfg.clone();
        undriven.drive.rabi = 0.0;
        let h0 = hamiltonian_from(&ops, &undriven, frame, 0.0);

        let mut k = h0.into_matrix();
        let mut jumps = Vec::new();
        for ch in build_channels(cfg, dephasing_reservoir) {
            let jm = ch.jump.matrix();
            let (anti, weight) = match ch.form {
                ChannelForm::Lindblad => (jm.dagger().matmul(jm).scale_real(ch.rate), 2.0 * ch.rate),
                ChannelForm::Sandwich => (ComplexMatrix::identity(dim).scale_real(0.5 * ch.rate), ch.rate),
            };
            k.axpy(C64::new(0.0, -1.0), &anti);
            jumps.push(Jump { weight, op: SparseOp::from_dense(jm) });
        }

        let driven = drive_on && cfg.drive.rabi != 0.0;
        let raise: Option<Operator> = driven.then(|| ops.sigma.dagger().scale_real(cfg.drive.rabi));
        let lower: Option<Operator> = driven.then(|| ops.sigma.scale_real(cfg.drive.rabi));
        let lab_omega = match frame {
            Frame::Lab => Some(cfg.drive.omega_d),
            Frame::RotatingAtDrive => None,
        };
        // In the rotating frame the drive is constant; fold it into K.
        let (drive_raise, drive_lower) = match (lab_omega, raise, lower) {
            (None, Some(r), Some(l)) => {
                k = &(&k + r.matrix()) + l.matrix();
                (None, None)
            }
            (Some(_), Some(r), Some(l)) => (Some(SparseOp::from_dense(r.matrix())), Some(SparseOp::from_dense(l.matrix()))),
            _ => (None, None),
        };

        Self {
            dim,
            k_static: SparseOp::from_dense(&k),
            drive_raise,
            drive_lower,
            lab_omega,
            jumps,
            scratch: vec![C64::new(0.0, 0.0); dim * dim],
            scratch_t: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    #[cfg(test)]
    pub(crate) fn is_autonomous(&self) -> bool {
        self.drive_raise.is_none()
    }

    /// Writes `dρ/dt` at time `t` into `out`.
    pub(crate) fn apply(&mut self, t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        let minus_i = C64::new(0.0, -1.0);
        out.fill(C64::new(0.0, 0.0));
        self.k_static.mul_dense_acc(minus_i, rho, out);
        if let (Some(raise), Some(lower), Some(w)) = (&self.drive_raise, &self.drive_lower, self.lab_omega) {
            let phase = C64::from_polar(1.0, -w * t);
            raise.mul_dense_acc(minus_i * phase, rho, out);
            lower.mul_dense_acc(minus_i * phase.conj(), rho, out);
        }
        for jump in &self.jumps {
            self.scratch.fill(C64::new(0.0, 0.0));
            jump.op.mul_dense_acc(C64::new(1.0, 0.0), rho, &mut self.scratch);
            for r in 0..d {
                for c in 0..d {
                    self.scratch_t[c * d + r] = self.scratch[r * d + c].conj();
                }
            }
            jump.op.mul_dense_acc(C64::new(0.5 * jump.weight, 0.0), &self.scratch_t, out);
        }
        // out ← A + A†
        for r in 0..d {
            out[r * d + r] = C64::new(2.0 * out[r * d + r].re, 0.0);
            for c in r + 1..d {
                let s = out[r * d + c] + out[c * d + r].conj();
                out[r * d + c] = s;
                out[c * d + r] = s.conj();
            }
        }
    }
}
