use crate::qlinalg::{ComplexMatrix, Operator, C64};

use super::operators::{build_mode_operators, jump_from};
use super::{ModelError, SystemConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelForm {
    /// `rate (2JρJ† − J†Jρ − ρJ†J)`.
    Lindblad,
    /// `rate (JρJ† − ρ)`, used for the qubit `σ_z` dephasing term.
    Sandwich,
}

/// One dissipative channel.
#[derive(Clone, Debug)]
pub struct Channel {
    pub label: &'static str,
    pub rate: f64,
    pub jump: Operator,
    pub form: ChannelForm,
}

/// Dissipative channels for `cfg`: the collective channel first, then every
/// intrinsic channel whose rate is nonzero. Rates are convention-adjusted.
///
/// With `dephasing_reservoir` set the collective jump is `O` (number
/// operators) instead of `o`.
pub fn build_channels(cfg: &SystemConfig, dephasing_reservoir: bool) -> Vec<Channel> {
    let ops = build_mode_operators(cfg.layout());
    let f = cfg.rate_convention.factor();
    let collective = if dephasing_reservoir {
        super::build_dephasing_jump(cfg)
    } else {
        jump_from(&ops, cfg.eta())
    };
    let mut channels = vec![Channel {
        label: if dephasing_reservoir { "collective_dephasing" } else { "collective" },
        rate: cfg.tau * f,
        jump: collective,
        form: ChannelForm::Lindblad,
    }];
    for (label, rate, jump) in [
        ("qubit_relaxation", cfg.gamma_sigma, &ops.sigma),
        ("resonator_a_relaxation", cfg.gamma_a, &ops.a),
        ("resonator_b_relaxation", cfg.gamma_b, &ops.b),
    ] {
        if rate > 0.0 {
            channels.push(Channel { label, rate: rate * f, jump: jump.clone(), form: ChannelForm::Lindblad });
        }
    }
    if cfg.gamma_phi > 0.0 {
        channels.push(Channel {
            label: "qubit_dephasing",
            rate: cfg.gamma_phi * f,
            jump: ops.sigma_z(),
            form: ChannelForm::Sandwich,
        });
    }
    channels
}

/// Master-equation right-hand side `−i[H,ρ] + Σ_c D_c[ρ]`.
pub fn liouvillian_apply(
    rho: &ComplexMatrix,
    h: &Operator,
    channels: &[Channel],
) -> Result<ComplexMatrix, ModelError> {
    let d = h.layout().dim();
    if rho.shape() != (d, d) {
        return Err(ModelError::Dimension { expected: d, found: rho.shape() });
    }
    if let Some(c) = channels.iter().find(|c| c.jump.layout() != h.layout()) {
        return Err(ModelError::Dimension { expected: d, found: c.jump.matrix().shape() });
    }

    let hm = h.matrix();
    let mut out = (&hm.matmul(rho) - &rho.matmul(hm)).scale(C64::new(0.0, -1.0));
    for c in channels {
        let j = c.jump.matrix();
        let jd = j.dagger();
        let sandwich = j.matmul(rho).matmul(&jd);
        match c.form {
            ChannelForm::Lindblad => {
                let jdj = jd.matmul(j);
                out.axpy(C64::new(2.0 * c.rate, 0.0), &sandwich);
                out.axpy(C64::new(-c.rate, 0.0), &jdj.matmul(rho));
                out.axpy(C64::new(-c.rate, 0.0), &rho.matmul(&jdj));
            }
            ChannelForm::Sandwich => {
                out.axpy(C64::new(c.rate, 0.0), &sandwich);
                out.axpy(C64::new(-c.rate, 0.0), rho);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, Frame, RateConvention};
    use crate::qlinalg::ModeLayout;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn cfg(eta: [f64; 3]) -> SystemConfig {
        SystemConfig::dimensionless([c(eta[0]), c(eta[1]), c(eta[2])])
    }

    fn projector(l: ModeLayout, q: usize, a: usize, b: usize) -> ComplexMatrix {
        let v = l.basis_ket(q, a, b);
        ComplexMatrix::outer(&v, &v)
    }

    #[test]
    fn channel_lists() {
        let mut cf = cfg([2.0, -1.0, -1.0]);
        let ch = build_channels(&cf, false);
        assert_eq!(ch.len(), 1);
        assert_eq!(ch[0].rate, 1.0);

        cf.gamma_b = 0.2;
        let ch = build_channels(&cf, false);
        assert_eq!(ch.iter().map(|c| c.label).collect::<Vec<_>>(), ["collective", "resonator_b_relaxation"]);
        assert_eq!(ch[1].rate, 0.2);

        let ch = build_channels(&cf, true);
        assert_eq!(ch[0].jump, super::super::build_dephasing_jump(&cf));

        cf.gamma_phi = 0.04;
        cf.rate_convention = RateConvention::DecayRate;
        let ch = build_channels(&cf, false);
        assert_eq!(ch.last().unwrap().form, ChannelForm::Sandwich);
        assert_eq!(ch.last().unwrap().rate, 0.02);
        assert_eq!(ch[0].rate, 0.5);
    }

    #[test]
    fn vacuum_is_stationary() {
        for eta in [[2.0, -1.0, -1.0], [0.3, 1.7, -0.2]] {
            let cf = cfg(eta);
            let l = cf.layout();
            let h = build_hamiltonian(&cf, Frame::Lab, 0.0);
            let out = liouvillian_apply(&projector(l, 0, 0, 0), &h, &build_channels(&cf, false)).unwrap();
            assert_eq!(out.max_abs(), 0.0);
        }
    }

    #[test]
    fn single_qubit_channel_population_rate() {
        let cf = cfg([1.0, 0.0, 0.0]);
        let l = cf.layout();
        let h = build_hamiltonian(&cf, Frame::Lab, 0.0);
        let out = liouvillian_apply(&projector(l, 1, 0, 0), &h, &build_channels(&cf, false)).unwrap();
        let e = l.index(1, 0, 0);
        assert!((out[(e, e)] - c(-2.0)).norm() < 1e-14);
    }

    #[test]
    fn dark_state_is_stationary() {
        // D1 for η = (1,1,1): (|e00⟩ − |g01⟩)/√2.
        let cf = cfg([1.0, 1.0, 1.0]);
        let l = cf.layout();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let d1: Vec<C64> = l.basis_ket(1, 0, 0).iter().zip(l.basis_ket(0, 0, 1)).map(|(x, y)| (x - y) * s).collect();
        let o = build_channels(&cf, false).remove(0).jump;
        assert!(o.apply(&d1).iter().all(|z| z.norm() < 1e-15));
        let rho = ComplexMatrix::outer(&d1, &d1);
        let h = build_hamiltonian(&cf, Frame::Lab, 0.0);
        let coherent = liouvillian_apply(&rho, &h, &[]).unwrap();
        assert!(coherent.max_abs() < 1e-12);
        let full = liouvillian_apply(&rho, &h, &build_channels(&cf, false)).unwrap();
        assert!(full.max_abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let cf = cfg([1.0, 1.0, 1.0]);
        let h = build_hamiltonian(&cf, Frame::Lab, 0.0);
        assert!(matches!(
            liouvillian_apply(&ComplexMatrix::zeros(4, 4), &h, &[]),
            Err(ModelError::Dimension { .. })
        ));
    }
}
