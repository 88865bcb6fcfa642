use crate::qlinalg::{annihilator, embed, ComplexMatrix, ModeLayout, Operator, C64};

use super::{Frame, SystemConfig};

/// Qubit lowering operator and the two bosonic annihilators on a layout.
#[derive(Clone, Debug)]
pub struct ModeOperators {
    pub sigma: Operator,
    pub a: Operator,
    pub b: Operator,
}

impl ModeOperators {
    pub fn layout(&self) -> ModeLayout {
        self.sigma.layout()
    }

    /// `σ_z = |e⟩⟨e| − |g⟩⟨g|` on the full space.
    pub fn sigma_z(&self) -> Operator {
        let sz = ComplexMatrix::from_real_rows(&[&[-1.0, 0.0], &[0.0, 1.0]]);
        embed(&sz, ModeLayout::QUBIT, self.layout()).expect("qubit site is 2-dimensional")
    }

    /// Total excitation number `σ†σ + a†a + b†b`.
    pub fn number(&self) -> Operator {
        let n_sigma = &self.sigma.dagger() * &self.sigma;
        let n_a = &self.a.dagger() * &self.a;
        let n_b = &self.b.dagger() * &self.b;
        &(&n_sigma + &n_a) + &n_b
    }
}

pub fn build_mode_operators(layout: ModeLayout) -> ModeOperators {
    let dims = layout.dims();
    let lower = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    ModeOperators {
        sigma: embed(&lower, ModeLayout::QUBIT, layout).expect("qubit site"),
        a: embed(&annihilator(dims[1]), ModeLayout::MODE_A, layout).expect("mode a"),
        b: embed(&annihilator(dims[2]), ModeLayout::MODE_B, layout).expect("mode b"),
    }
}

/// Collective jump operator `o = η_σ σ + η_a a + η_b b`.
pub fn build_jump_operator(cfg: &SystemConfig) -> Operator {
    let ops = build_mode_operators(cfg.layout());
    jump_from(&ops, cfg.eta())
}

pub(crate) fn jump_from(ops: &ModeOperators, eta: [C64; 3]) -> Operator {
    &(&ops.sigma.scale(eta[0]) + &ops.a.scale(eta[1])) + &ops.b.scale(eta[2])
}

/// Collective dephasing operator `O = η_σ σ†σ + η_a a†a + η_b b†b`.
pub fn build_dephasing_jump(cfg: &SystemConfig) -> Operator {
    let ops = build_mode_operators(cfg.layout());
    let [es, ea, eb] = cfg.eta();
    let n_sigma = &ops.sigma.dagger() * &ops.sigma;
    let n_a = &ops.a.dagger() * &ops.a;
    let n_b = &ops.b.dagger() * &ops.b;
    &(&n_sigma.scale(es) + &n_a.scale(ea)) + &n_b.scale(eb)
}

/// System Hamiltonian with the drive at time `t`.
///
/// In the lab frame this is `Σ ω_α α†α + Θ(t0−t) Ω_d (σ† e^{−iω_d t} + σ e^{iω_d t})`.
/// In the frame rotating at `ω_d 𝒩` the frequencies become detunings and the
/// drive loses its time dependence.
pub fn build_hamiltonian(cfg: &SystemConfig, frame: Frame, t: f64) -> Operator {
    let ops = build_mode_operators(cfg.layout());
    hamiltonian_from(&ops, cfg, frame, t)
}

pub(crate) fn hamiltonian_from(ops: &ModeOperators, cfg: &SystemConfig, frame: Frame, t: f64) -> Operator {
    let shift = match frame {
        Frame::Lab => 0.0,
        Frame::RotatingAtDrive => cfg.drive.omega_d,
    };
    let num = |op: &Operator| &op.dagger() * op;
    let mut h = num(&ops.sigma).scale_real(cfg.omega_sigma - shift);
    h = &h + &num(&ops.a).scale_real(cfg.omega_a - shift);
    h = &h + &num(&ops.b).scale_real(cfg.omega_b - shift);
    if cfg.drive.is_on(t) {
        h = &h + &drive_term(ops, cfg, frame, t);
    }
    h
}

/// The drive contribution alone (no Heaviside factor).
fn drive_term(ops: &ModeOperators, cfg: &SystemConfig, frame: Frame, t: f64) -> Operator {
    let phase = match frame {
        Frame::Lab => C64::from_polar(1.0, -cfg.drive.omega_d * t),
        Frame::RotatingAtDrive => C64::new(1.0, 0.0),
    };
    let raise = ops.sigma.dagger().scale(phase * cfg.drive.rabi);
    let lower = ops.sigma.scale(phase.conj() * cfg.drive.rabi);
    &raise + &lower
}

/// `H_eff = H_s − iτ o†o` (lab frame, no drive), with τ the convention-adjusted
/// coefficient.
pub fn effective_hamiltonian(cfg: &SystemConfig) -> Operator {
    let ops = build_mode_operators(cfg.layout());
    let mut undriven = cfg.clone();
    undriven.drive.rabi = 0.0;
    let hs = hamiltonian_from(&ops, &undriven, Frame::Lab, 0.0);
    let o = jump_from(&ops, cfg.eta());
    let odo = &o.dagger() * &o;
    &hs + &odo.scale(C64::new(0.0, -cfg.tau_coefficient()))
}
