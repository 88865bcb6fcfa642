//! Tensor-product layout of the qubit and the two truncated bosonic modes.

use std::ops::{Add, Mul, Sub};

use super::{kron, ComplexMatrix, LinalgError, C64};

/// Ordered per-mode dimensions `[qubit, resonator a, resonator b]`.
///
/// Basis ordering is fixed: qubit `|g⟩ = 0`, `|e⟩ = 1`; each bosonic mode is
/// Fock-ascending. The qubit is the most significant index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeLayout {
    dims: [usize; 3],
}

impl ModeLayout {
    pub const QUBIT: usize = 0;
    pub const MODE_A: usize = 1;
    pub const MODE_B: usize = 2;

    /// Layout with `n_max + 1` Fock levels in each resonator.
    pub fn with_truncation(n_max: usize) -> Result<Self, LinalgError> {
        Self::from_dims([2, n_max + 1, n_max + 1])
    }

    pub fn from_dims(dims: [usize; 3]) -> Result<Self, LinalgError> {
        if dims[0] != 2 || dims[1] < 2 || dims[2] < 2 {
            return Err(LinalgError::InvalidLayout(dims));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Flat index of `|q, n_a, n_b⟩`; `q` is 0 for `g` and 1 for `e`.
    pub fn index(&self, q: usize, n_a: usize, n_b: usize) -> usize {
        assert!(q < 2 && n_a < self.dims[1] && n_b < self.dims[2], "basis label out of range");
        (q * self.dims[1] + n_a) * self.dims[2] + n_b
    }

    /// Inverse of [`ModeLayout::index`].
    pub fn labels(&self, index: usize) -> (usize, usize, usize) {
        let n_b = index % self.dims[2];
        let rest = index / self.dims[2];
        (rest / self.dims[1], rest % self.dims[1], n_b)
    }

    /// Computational basis vector `|q, n_a, n_b⟩`.
    pub fn basis_ket(&self, q: usize, n_a: usize, n_b: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[self.index(q, n_a, n_b)] = C64::new(1.0, 0.0);
        v
    }
}

/// A dense matrix acting on the full space of a [`ModeLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: ModeLayout,
    matrix: ComplexMatrix,
}

impl Operator {
    pub fn new(layout: ModeLayout, matrix: ComplexMatrix) -> Result<Self, LinalgError> {
        let d = layout.dim();
        if matrix.shape() != (d, d) {
            return Err(LinalgError::Shape { expected: (d, d), found: matrix.shape() });
        }
        Ok(Self { layout, matrix })
    }

    pub fn zeros(layout: ModeLayout) -> Self {
        let d = layout.dim();
        Self { layout, matrix: ComplexMatrix::zeros(d, d) }
    }

    pub fn identity(layout: ModeLayout) -> Self {
        Self { layout, matrix: ComplexMatrix::identity(layout.dim()) }
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dagger(&self) -> Self {
        Self { layout: self.layout, matrix: self.matrix.dagger() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { layout: self.layout, matrix: self.matrix.scale(s) }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { layout: self.layout, matrix: self.matrix.scale_real(s) }
    }

    /// `op|ψ⟩` on raw amplitudes.
    pub fn apply(&self, amplitudes: &[C64]) -> Vec<C64> {
        self.matrix.mul_vec(amplitudes)
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.layout, rhs.layout, "layout mismatch");
        Operator { layout: self.layout, matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.layout, rhs.layout, "layout mismatch");
        Operator { layout: self.layout, matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.layout, rhs.layout, "layout mismatch");
        Operator { layout: self.layout, matrix: self.matrix.matmul(&rhs.matrix) }
    }
}

/// Lifts a single-mode operator to the full space: `I ⊗ … ⊗ op ⊗ … ⊗ I`.
pub fn embed(op: &ComplexMatrix, site: usize, layout: ModeLayout) -> Result<Operator, LinalgError> {
    let dims = layout.dims();
    if site >= dims.len() {
        return Err(LinalgError::SiteOutOfRange(site));
    }
    if op.shape() != (dims[site], dims[site]) {
        return Err(LinalgError::Shape { expected: (dims[site], dims[site]), found: op.shape() });
    }
    let mut full = ComplexMatrix::identity(1);
    for (k, &d) in dims.iter().enumerate() {
        let factor = if k == site { op.clone() } else { ComplexMatrix::identity(d) };
        full = kron(&full, &factor);
    }
    Operator::new(layout, full)
}

/// Truncated bosonic annihilator on `dim` Fock levels: `a|n⟩ = √n |n−1⟩`.
pub fn annihilator(dim: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> ModeLayout {
        ModeLayout::with_truncation(2).unwrap()
    }

    #[test]
    fn layout_validation() {
        assert!(ModeLayout::from_dims([3, 3, 3]).is_err());
        assert!(ModeLayout::from_dims([2, 1, 3]).is_err());
        assert_eq!(layout().dim(), 18);
        assert_eq!(layout().index(1, 0, 0), 9);
        for i in 0..18 {
            let (q, a, b) = layout().labels(i);
            assert_eq!(layout().index(q, a, b), i);
        }
    }

    #[test]
    fn embed_qubit_operator() {
        let sigma = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let op = embed(&sigma, 0, layout()).unwrap();
        let expected = kron(&kron(&sigma, &ComplexMatrix::identity(3)), &ComplexMatrix::identity(3));
        assert_eq!(op.matrix(), &expected);
        assert_eq!(op.matrix().shape(), (18, 18));
    }

    #[test]
    fn embed_identity_gives_identity() {
        let op = embed(&ComplexMatrix::identity(2), 0, layout()).unwrap();
        assert_eq!(op.matrix(), &ComplexMatrix::identity(18));
    }

    #[test]
    fn embed_ladder_action() {
        let l = layout();
        let a = embed(&annihilator(3), 1, l).unwrap();
        let out = a.apply(&l.basis_ket(0, 1, 0));
        assert_eq!(out, l.basis_ket(0, 0, 0));
    }

    #[test]
    fn embed_dimension_mismatch() {
        assert!(matches!(
            embed(&ComplexMatrix::identity(2), 1, layout()),
            Err(LinalgError::Shape { .. })
        ));
        assert!(embed(&ComplexMatrix::identity(2), 3, layout()).is_err());
    }
}
