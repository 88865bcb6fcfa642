//! Brute-force propagation through the exponential of the Liouvillian
//! supermatrix, independent of the Runge–Kutta path.

use crate::model::{build_channels, build_hamiltonian, ChannelForm, Frame, SystemConfig};
use crate::qlinalg::{kron, matrix_exponential, ComplexMatrix, C64};

use super::state::DensityMatrix;
use super::DynamicsError;

/// Largest supermatrix dimension `d²` the oracle accepts.
pub const MAX_ORACLE_DIM: usize = 2500;

/// Column-stacking `vec(ρ)`.
fn vectorize(m: &ComplexMatrix) -> Vec<C64> {
    let (r, c) = m.shape();
    (0..c).flat_map(|j| (0..r).map(move |i| (i, j))).map(|(i, j)| m[(i, j)]).collect()
}

fn unvectorize(v: &[C64], d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| v[j * d + i])
}

/// Supermatrix of the generator on one segment, using
/// `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.
pub fn liouvillian_supermatrix(cfg: &SystemConfig, frame: Frame, t: f64, dephasing_reservoir: bool) -> ComplexMatrix {
    let d = cfg.layout().dim();
    let id = ComplexMatrix::identity(d);
    let h = build_hamiltonian(cfg, frame, t).into_matrix();
    let mut l = (&kron(&id, &h) - &kron(&h.transpose(), &id)).scale(C64::new(0.0, -1.0));
    for ch in build_channels(cfg, dephasing_reservoir) {
        let j = ch.jump.matrix();
        let sandwich = kron(&j.conj(), j);
        match ch.form {
            ChannelForm::Lindblad => {
                let jdj = j.dagger().matmul(j);
                l.axpy(C64::new(2.0 * ch.rate, 0.0), &sandwich);
                l.axpy(C64::new(-ch.rate, 0.0), &kron(&id, &jdj));
                l.axpy(C64::new(-ch.rate, 0.0), &kron(&jdj.transpose(), &id));
            }
            ChannelForm::Sandwich => {
                l.axpy(C64::new(ch.rate, 0.0), &sandwich);
                l.axpy(C64::new(-ch.rate, 0.0), &ComplexMatrix::identity(d * d));
            }
        }
    }
    l
}

/// `ρ(t)` from `exp(L Δt)` applied per pulse segment, rotating frame.
pub fn oracle_propagate(
    rho0: &DensityMatrix,
    cfg: &SystemConfig,
    t: f64,
    dephasing_reservoir: bool,
) -> Result<DensityMatrix, DynamicsError> {
    let mut out = oracle_states_at(rho0, cfg, &[t], dephasing_reservoir)?;
    Ok(out.pop().expect("one time in, one state out"))
}

/// `ρ` at each of `times` (non-decreasing, from 0), stepping from one time to
/// the next with exact propagators. Each distinct interval length on either
/// side of `t0` costs one matrix exponential; lengths within a few ulps share it.
pub fn oracle_states_at(
    rho0: &DensityMatrix,
    cfg: &SystemConfig,
    times: &[f64],
    dephasing_reservoir: bool,
) -> Result<Vec<DensityMatrix>, DynamicsError> {
    cfg.validate()?;
    let layout = cfg.layout();
    let d = layout.dim();
    if d * d > MAX_ORACLE_DIM {
        return Err(DynamicsError::OracleTooLarge { dim: d * d, max: MAX_ORACLE_DIM });
    }
    if rho0.layout() != layout {
        return Err(DynamicsError::LayoutMismatch { expected: d, found: rho0.layout().dim() });
    }
    let mut prev = 0.0;
    for &t in times {
        if t.is_nan() || t < prev || t.is_infinite() {
            return Err(DynamicsError::BadGrid(format!("oracle times must be finite, >= 0 and non-decreasing, got {t}")));
        }
        prev = t;
    }
    let t0 = cfg.drive.t0;
    let tol = 8.0 * f64::EPSILON * prev.max(1.0);
    // Generators before and after switch-off, built on first use.
    let mut generators: [Option<ComplexMatrix>; 2] = [None, None];
    let mut cache: Vec<(usize, f64, ComplexMatrix)> = Vec::new();
    let mut v = vectorize(rho0.matrix());
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let mut pieces = Vec::new();
        if now < t0 {
            pieces.push((0, now, t.min(t0)));
        }
        if t > t0 {
            pieces.push((1, now.max(t0), t));
        }
        for (side, start, end) in pieces {
            let len = end - start;
            if len <= 0.0 {
                continue;
            }
            let hit = cache.iter().position(|(s, l, _)| *s == side && (l - len).abs() <= tol);
            let k = match hit {
                Some(k) => k,
                None => {
                    // Evaluate the (piecewise constant) generator inside the segment.
                    let l = generators[side].get_or_insert_with(|| {
                        liouvillian_supermatrix(cfg, Frame::RotatingAtDrive, 0.5 * (start + end), dephasing_reservoir)
                    });
                    cache.push((side, len, matrix_exponential(&l.scale_real(len))?));
                    cache.len() - 1
                }
            };
            v = cache[k].2.mul_vec(&v);
        }
        now = t;
        out.push(DensityMatrix::unchecked(layout, unvectorize(&v, d))?);
    }
    Ok(out)
}
