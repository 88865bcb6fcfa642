//! Row-major dense complex matrices.

use std::fmt;
use std::io::Write;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;

use super::{LinalgError, C64};

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting a length mismatch or
    /// any non-finite entry.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Row-major construction from nested rows of real numbers.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let data = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), c, "ragged rows");
                row.iter().map(|&x| C64::new(x, 0.0))
            })
            .collect();
        Self { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in diag.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// Matrix product; panics on inner-dimension mismatch.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        matmul_into(self, rhs, &mut out);
        out
    }

    pub fn try_matmul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::Shape { expected: (self.cols, rhs.cols), found: rhs.shape() });
        }
        Ok(self.matmul(rhs))
    }

    /// `A·v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// In-place `self += s·other`.
    pub fn axpy(&mut self, s: C64, other: &Self) {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Dumps the matrix as `row,col,re,im` lines for external cross-checking.
    /// Exact zeros are skipped.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                if z.re != 0.0 || z.im != 0.0 {
                    writeln!(w, "{i},{j},{:.17e},{:.17e}", z.re, z.im)?;
                }
            }
        }
        Ok(())
    }
}

/// `out = a·b` without allocating; `out` must already have the right shape.
fn matmul_into(a: &ComplexMatrix, b: &ComplexMatrix, out: &mut ComplexMatrix) {
    debug_assert_eq!(a.cols, b.rows);
    debug_assert_eq!(out.shape(), (a.rows, b.cols));
    let n = b.cols;
    out.data.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
    for i in 0..a.rows {
        let out_row = &mut out.data[i * n..(i + 1) * n];
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            let b_row = &b.data[k * n..(k + 1) * n];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    let cols = ac * bc;
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out.data[(i * br + k) * cols + j * bc + l] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_with_identity_is_block_diagonal() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64 + 1.0, j as f64));
        let k = kron(&ComplexMatrix::identity(2), &a);
        assert_eq!(k.shape(), (6, 6));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(k[(i, j)], a[(i, j)]);
                assert_eq!(k[(i + 3, j + 3)], a[(i, j)]);
                assert_eq!(k[(i, j + 3)], c(0.0, 0.0));
                assert_eq!(k[(i + 3, j)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn kron_index_algebra() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c(1.0 + i as f64, 2.0 * j as f64 - 1.0));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| c(3.0 * i as f64 + j as f64, 0.5));
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (6, 6));
        // row = i·3 + k, col = j·3 + l
        assert_eq!(k[(0, 4)], a[(0, 1)] * b[(0, 1)]);
        assert_eq!(k[(1, 4)], a[(0, 1)] * b[(1, 1)]);
    }

    #[test]
    fn kron_with_scalar_identity_is_noop() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64));
        assert_eq!(kron(&a, &ComplexMatrix::identity(1)), a);
    }

    #[test]
    fn dagger_cases() {
        let id = ComplexMatrix::identity(4);
        assert_eq!(dagger(&id), id);
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64 - j as f64, 1.0 + j as f64));
        assert_eq!(dagger(&dagger(&a)), a);
        let lower = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(dagger(&lower), ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]));
    }

    #[test]
    fn from_vec_rejects_bad_input() {
        assert!(ComplexMatrix::from_vec(2, 2, vec![c(0.0, 0.0); 3]).is_err());
        let mut v = vec![c(0.0, 0.0); 4];
        v[2] = c(f64::NAN, 0.0);
        assert_eq!(ComplexMatrix::from_vec(2, 2, v), Err(LinalgError::NonFinite));
    }

    #[test]
    fn csv_dump_skips_zeros() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.5], &[0.0, 0.0]]);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("0,1,1.5"));
    }
}
