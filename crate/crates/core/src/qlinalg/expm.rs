//! Matrix exponential by scaling and squaring with diagonal Padé approximants.
//!
//! Degree and squaring count are selected from the 1-norm using the
//! backward-error thresholds of Higham (2005). No balancing is applied.

use super::{ComplexMatrix, LinalgError, C64};

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        13 => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
        _ => unreachable!("unsupported Padé degree {m}"),
    }
}

/// `exp(A)` for a square matrix.
pub fn matrix_exponential(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare(a.shape()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = a.norm_one();
    if !norm.is_finite() {
        return Err(LinalgError::NonFinite);
    }

    for &(m, theta) in &THETA[..4] {
        if norm <= theta {
            return pade(a, m);
        }
    }

    let theta13 = THETA[4].1;
    let s = if norm > theta13 { (norm / theta13).log2().ceil().max(0.0) as i32 } else { 0 };
    let scaled = a.scale_real(0.5f64.powi(s));
    let mut x = pade(&scaled, 13)?;
    for _ in 0..s {
        x = x.matmul(&x);
    }
    Ok(x)
}

fn pade(a: &ComplexMatrix, m: usize) -> Result<ComplexMatrix, LinalgError> {
    let b = pade_coefficients(m);
    let n = a.rows();
    let ident = ComplexMatrix::identity(n);
    let a2 = a.matmul(a);

    let (u, v) = if m == 13 {
        let a4 = a2.matmul(&a2);
        let a6 = a4.matmul(&a2);
        let mut inner_u = a6.scale_real(b[13]);
        inner_u.axpy(C64::new(b[11], 0.0), &a4);
        inner_u.axpy(C64::new(b[9], 0.0), &a2);
        let mut u = a6.matmul(&inner_u);
        u.axpy(C64::new(b[7], 0.0), &a6);
        u.axpy(C64::new(b[5], 0.0), &a4);
        u.axpy(C64::new(b[3], 0.0), &a2);
        u.axpy(C64::new(b[1], 0.0), &ident);
        let u = a.matmul(&u);

        let mut inner_v = a6.scale_real(b[12]);
        inner_v.axpy(C64::new(b[10], 0.0), &a4);
        inner_v.axpy(C64::new(b[8], 0.0), &a2);
        let mut v = a6.matmul(&inner_v);
        v.axpy(C64::new(b[6], 0.0), &a6);
        v.axpy(C64::new(b[4], 0.0), &a4);
        v.axpy(C64::new(b[2], 0.0), &a2);
        v.axpy(C64::new(b[0], 0.0), &ident);
        (u, v)
    } else {
        // Even powers A^0, A^2, ..., A^{m-1}.
        let mut powers = vec![ident.clone(), a2.clone()];
        while powers.len() < m.div_ceil(2) {
            let next = powers.last().unwrap().matmul(&a2);
            powers.push(next);
        }
        let mut u = ComplexMatrix::zeros(n, n);
        let mut v = ComplexMatrix::zeros(n, n);
        for (k, p) in powers.iter().enumerate() {
            u.axpy(C64::new(b[2 * k + 1], 0.0), p);
            v.axpy(C64::new(b[2 * k], 0.0), p);
        }
        (a.matmul(&u), v)
    };

    let denom = (&v - &u).to_nalgebra();
    let numer = (&v + &u).to_nalgebra();
    let sol = denom.lu().solve(&numer).ok_or(LinalgError::Singular)?;
    Ok(ComplexMatrix::from_nalgebra(&sol))
}
