use crate::qlinalg::{hermitian_eigenvalues, ComplexMatrix, ModeLayout, C64};
use crate::spectral::StateVector;

use super::DynamicsError;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const MIN_EIGENVALUE_TOL: f64 = -1e-8;
/// Largest tolerated `|Im ⟨ψ|ρ|ψ⟩|`.
pub const FIDELITY_IMAG_TOL: f64 = 1e-10;

/// A density operator on a [`ModeLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: ModeLayout,
    matrix: ComplexMatrix,
}

/// Health of a density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// `|Tr ρ − 1|`.
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// `Tr ρ²`.
    pub purity: f64,
}

impl Diagnostics {
    /// The first violated invariant, as `(quantity, value)`.
    pub fn violation(&self) -> Option<(&'static str, f64)> {
        // NaN counts as a violation.
        if self.hermiticity_error.is_nan() || self.hermiticity_error > HERMITICITY_TOL {
            Some(("hermiticity error", self.hermiticity_error))
        } else if self.trace_error.is_nan() || self.trace_error > TRACE_TOL {
            Some(("trace error", self.trace_error))
        } else if self.min_eigenvalue.is_nan() || self.min_eigenvalue < MIN_EIGENVALUE_TOL {
            Some(("minimum eigenvalue", self.min_eigenvalue))
        } else {
            None
        }
    }
}

impl DensityMatrix {
    /// Validated construction; rejects states that break any invariant.
    pub fn new(layout: ModeLayout, matrix: ComplexMatrix) -> Result<Self, DynamicsError> {
        let rho = Self::unchecked(layout, matrix)?;
        let diag = check_state(&rho)?;
        if let Some((quantity, value)) = diag.violation() {
            return Err(DynamicsError::InvalidState { quantity, value });
        }
        Ok(rho)
    }

    pub(crate) fn unchecked(layout: ModeLayout, matrix: ComplexMatrix) -> Result<Self, DynamicsError> {
        let d = layout.dim();
        if matrix.shape() != (d, d) {
            return Err(DynamicsError::LayoutMismatch { expected: d, found: matrix.rows() });
        }
        if !matrix.is_finite() {
            return Err(DynamicsError::InvalidState { quantity: "non-finite entry", value: f64::NAN });
        }
        Ok(Self { layout, matrix })
    }

    pub fn pure(psi: &StateVector) -> Result<Self, DynamicsError> {
        Self::new(psi.layout(), psi.projector())
    }

    pub fn vacuum(layout: ModeLayout) -> Self {
        let psi = StateVector::basis(layout, 0, 0, 0);
        Self { layout, matrix: psi.projector() }
    }

    pub fn maximally_mixed(layout: ModeLayout) -> Self {
        let d = layout.dim();
        Self { layout, matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64) }
    }

    /// `Σ p_i |ψ_i⟩⟨ψ_i|`.
    pub fn mixture(components: &[(f64, &StateVector)]) -> Result<Self, DynamicsError> {
        let layout = components.first().ok_or(DynamicsError::InvalidState { quantity: "empty mixture", value: 0.0 })?.1.layout();
        let d = layout.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (p, psi) in components {
            if psi.layout() != layout {
                return Err(DynamicsError::LayoutMismatch { expected: d, found: psi.layout().dim() });
            }
            m.axpy(C64::new(*p, 0.0), &psi.projector());
        }
        Self::new(layout, m)
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `⟨q n_a n_b|ρ|q n_a n_b⟩`.
    pub fn population(&self, q: usize, n_a: usize, n_b: usize) -> f64 {
        let i = self.layout.index(q, n_a, n_b);
        self.matrix[(i, i)].re
    }

    /// Populations of `|e00⟩, |g10⟩, |g01⟩, |g00⟩`.
    pub fn populations(&self) -> [f64; 4] {
        [self.population(1, 0, 0), self.population(0, 1, 0), self.population(0, 0, 1), self.population(0, 0, 0)]
    }

    /// `Tr(ρ 𝒩)`, the mean total excitation number.
    pub fn mean_excitation(&self) -> f64 {
        (0..self.layout.dim())
            .map(|i| {
                let (q, a, b) = self.layout.labels(i);
                (q + a + b) as f64 * self.matrix[(i, i)].re
            })
            .sum()
    }
}

/// Trace error, Hermiticity error, smallest eigenvalue and purity.
pub fn check_state(rho: &DensityMatrix) -> Result<Diagnostics, DynamicsError> {
    let m = &rho.matrix;
    let hermiticity_error = m.hermiticity_error();
    // Eigenvalues of the Hermitian part; the anti-Hermitian part is reported
    // separately.
    let herm = (m + &m.dagger()).scale_real(0.5);
    let eigs = hermitian_eigenvalues(&herm)?;
    let purity = m.as_slice().iter().map(|z| z.norm_sqr()).sum();
    Ok(Diagnostics {
        trace_error: (m.trace() - C64::new(1.0, 0.0)).norm(),
        hermiticity_error,
        min_eigenvalue: eigs.first().copied().unwrap_or(0.0),
        purity,
    })
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity(rho: &DensityMatrix, psi: &StateVector) -> Result<f64, DynamicsError> {
    if psi.layout() != rho.layout {
        return Err(DynamicsError::LayoutMismatch { expected: rho.layout.dim(), found: psi.layout().dim() });
    }
    if (psi.norm() - 1.0).abs() > 1e-9 {
        return Err(DynamicsError::InvalidState { quantity: "target norm", value: psi.norm() });
    }
    fidelity_raw(rho.matrix.as_slice(), psi.amplitudes())
}

pub(crate) fn fidelity_raw(rho: &[C64], psi: &[C64]) -> Result<f64, DynamicsError> {
    let d = psi.len();
    let mut acc = C64::new(0.0, 0.0);
    for (i, pi) in psi.iter().enumerate() {
        if *pi == C64::new(0.0, 0.0) {
            continue;
        }
        let row = &rho[i * d..(i + 1) * d];
        let r: C64 = row.iter().zip(psi).map(|(x, p)| x * p).sum();
        acc += pi.conj() * r;
    }
    if acc.im.abs() > FIDELITY_IMAG_TOL {
        return Err(DynamicsError::FidelityResidue(acc.im));
    }
    Ok(acc.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::catalog_w_states;

    fn w1() -> StateVector {
        catalog_w_states().unwrap().remove(0).state
    }

    #[test]
    fn fidelity_cases() {
        let d = w1();
        let l = d.layout();
        assert!((fidelity(&DensityMatrix::pure(&d).unwrap(), &d).unwrap() - 1.0).abs() < 1e-15);
        let g00 = StateVector::basis(l, 0, 0, 0);
        let mix = DensityMatrix::mixture(&[(0.3, &d), (0.7, &g00)]).unwrap();
        assert!((fidelity(&mix, &d).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(fidelity(&DensityMatrix::vacuum(l), &d).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_rejects_corruption() {
        let d = w1();
        let l = d.layout();
        let mut m = d.projector();
        let (i, j) = (l.index(1, 0, 0), l.index(0, 1, 0));
        m[(i, j)] += C64::new(0.0, 1e-6);
        let rho = DensityMatrix::unchecked(l, m).unwrap();
        assert!(matches!(fidelity(&rho, &d), Err(DynamicsError::FidelityResidue(_))));
    }

    #[test]
    fn diagnostics() {
        let l = ModeLayout::with_truncation(2).unwrap();
        let v = check_state(&DensityMatrix::vacuum(l)).unwrap();
        assert_eq!((v.trace_error, v.purity), (0.0, 1.0));
        assert!(v.min_eigenvalue.abs() < 1e-14);
        let mm = check_state(&DensityMatrix::maximally_mixed(l)).unwrap();
        assert!((mm.purity - 1.0 / 18.0).abs() < 1e-15);
        let g00 = StateVector::basis(l, 0, 0, 0);
        let mix = DensityMatrix::mixture(&[(0.5, &w1()), (0.5, &g00)]).unwrap();
        assert!((check_state(&mix).unwrap().purity - 0.5).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let l = ModeLayout::with_truncation(2).unwrap();
        let bad = ComplexMatrix::identity(18);
        assert!(matches!(DensityMatrix::new(l, bad), Err(DynamicsError::InvalidState { quantity: "trace error", .. })));
        let mut neg = DensityMatrix::vacuum(l).into_matrix();
        let e = l.index(1, 0, 0);
        neg[(e, e)] = C64::new(-0.1, 0.0);
        neg[(0, 0)] = C64::new(1.1, 0.0);
        assert!(matches!(DensityMatrix::new(l, neg), Err(DynamicsError::InvalidState { quantity: "minimum eigenvalue", .. })));
        assert!(matches!(DensityMatrix::new(l, ComplexMatrix::identity(4)), Err(DynamicsError::LayoutMismatch { .. })));
    }

    #[test]
    fn mean_excitation_counts_quanta() {
        let l = ModeLayout::with_truncation(2).unwrap();
        let psi = StateVector::basis(l, 1, 2, 1);
        assert_eq!(DensityMatrix::pure(&psi).unwrap().mean_excitation(), 4.0);
    }
}
