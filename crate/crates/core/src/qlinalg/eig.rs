//! Eigen-decomposition of general complex matrices.
//!
//! The complex Schur form `A = Q T Q†` comes from nalgebra; eigenvectors are
//! recovered by back-substitution on the triangular factor. Eigenvectors that
//! share an eigenvalue are orthonormalized, and linearly dependent ones are
//! dropped, which is how defective matrices are detected.

use nalgebra::linalg::Schur;

use super::{ComplexMatrix, LinalgError, C64};

/// Largest dimension accepted by [`eig_nonhermitian`].
pub const MAX_EIG_DIM: usize = 1000;

const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: C64,
    /// Unit-norm eigenvector.
    pub vector: Vec<C64>,
    /// `‖A v − λ v‖`.
    pub residual: f64,
    /// True when `residual ≤ 1e-9 ‖A‖_F`.
    pub accurate: bool,
}

#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub pairs: Vec<EigenPair>,
    /// Set when some eigenvalue has fewer independent eigenvectors than its
    /// algebraic multiplicity.
    pub defective: bool,
}

impl Eigensystem {
    pub fn values(&self) -> Vec<C64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

/// Eigenpairs of an arbitrary square complex matrix.
pub fn eig_nonhermitian(a: &ComplexMatrix) -> Result<Eigensystem, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare(a.shape()));
    }
    let n = a.rows();
    if n > MAX_EIG_DIM {
        return Err(LinalgError::TooLarge { dim: n, max: MAX_EIG_DIM });
    }
    if n == 0 {
        return Ok(Eigensystem { pairs: Vec::new(), defective: false });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }

    let schur = Schur::try_new(a.to_nalgebra(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(LinalgError::NoConvergence)?;
    let (q, t) = schur.unpack();
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * scale).max(f64::MIN_POSITIVE);

    let mut raw: Vec<(C64, Vec<C64>)> = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut x = vec![C64::new(0.0, 0.0); n];
        x[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * x[j];
            }
            let mut den = t[(i, i)] - lambda;
            if den.norm() < smin {
                den = C64::new(smin, 0.0);
            }
            x[i] = -acc / den;
        }
        // Rescale before the final product to avoid overflow on near-defective input.
        let big = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        x.iter_mut().for_each(|z| *z /= big);
        let mut v: Vec<C64> = (0..n).map(|i| (0..n).map(|j| q[(i, j)] * x[j]).sum()).collect();
        normalize(&mut v);
        raw.push((lambda, v));
    }

    // Group numerically equal eigenvalues and keep an orthonormal basis of
    // each eigenspace.
    let cluster_tol = 1e-8 * scale;
    let mut used = vec![false; n];
    let mut pairs = Vec::with_capacity(n);
    let mut defective = false;
    for i in 0..n {
        if used[i] {
            continue;
        }
        let members: Vec<usize> =
            (i..n).filter(|&j| !used[j] && (raw[j].0 - raw[i].0).norm() <= cluster_tol).collect();
        let mut basis: Vec<Vec<C64>> = Vec::new();
        for &j in &members {
            used[j] = true;
            let mut v = raw[j].1.clone();
            for b in &basis {
                let proj = inner(b, &v);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= proj * bi);
            }
            let norm = norm2(&v);
            if norm > 1e-6 {
                v.iter_mut().for_each(|z| *z /= norm);
                basis.push(v);
                pairs.push((raw[j].0, basis.last().unwrap().clone()));
            }
        }
        if basis.len() < members.len() {
            defective = true;
        }
    }

    let pairs = pairs
        .into_iter()
        .map(|(value, vector)| {
            let av = a.mul_vec(&vector);
            let residual = av.iter().zip(&vector).map(|(x, v)| (x - value * v).norm_sqr()).sum::<f64>().sqrt();
            EigenPair { value, vector, residual, accurate: residual <= 1e-9 * scale }
        })
        .collect();
    Ok(Eigensystem { pairs, defective })
}

/// Real eigenvalues of a Hermitian matrix in ascending order. Only the lower
/// triangle is read.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare(a.shape()));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let m = a.to_nalgebra();
    let mut vals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        // Strongly graded spectra (a density matrix with eigenvalues down to
        // 1e-56 and a row of 1e-180 entries) can drive the implicit QR shift
        // to 0/0. Moving the spectrum away from zero avoids it at an absolute
        // cost of order eps·‖A‖.
        let c = a.max_abs().max(f64::MIN_POSITIVE);
        let shifted = m + nalgebra::DMatrix::<C64>::identity(a.rows(), a.rows()) * C64::new(c, 0.0);
        vals = shifted.symmetric_eigenvalues().iter().map(|v| v - c).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// `⟨u|v⟩`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [C64]) {
    let n = norm2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
}
