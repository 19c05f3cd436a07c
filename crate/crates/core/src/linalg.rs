//! Dense linear-algebra helpers: matrix exponential, induced norms, null spaces.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

// Padé(13) numerator/denominator coefficients b_0..b_13.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which Padé(13) meets unit-roundoff backward error.
const THETA13: f64 = 5.371_920_351_148_152;

const MAX_SQUARINGS: i32 = 1024;

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant. Exactly symmetric inputs go through an eigendecomposition.
pub fn expm<T: Real>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Input(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let norm = norm_1(a);
    if !norm.is_finite() {
        return Err(Error::Range("non-finite entries in exponent".into()));
    }
    if a == &a.transpose() {
        return expm_symmetric(a);
    }

    let ratio = crate::scalar::to_f64(norm) / THETA13;
    let squarings = if ratio > 1.0 { ratio.log2().ceil() as i32 } else { 0 };
    if squarings > MAX_SQUARINGS {
        return Err(Error::Range(format!(
            "exponent norm {} needs {} squarings",
            crate::scalar::to_f64(norm),
            squarings
        )));
    }
    let scale: T = lit(0.5f64.powi(squarings));
    let a = a * scale;

    let b = |k: usize| -> T { lit(PADE13[k]) };
    let ident = DMatrix::<T>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = &a * (&a6 * inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1));
    let inner_v = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::Range("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::Range("matrix exponential overflowed".into()));
    }
    Ok(r)
}

fn expm_symmetric<T: Real>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let eig = a.clone().symmetric_eigen();
    let exp_vals = eig.eigenvalues.map(|l| l.exp());
    if exp_vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::Range("matrix exponential overflowed".into()));
    }
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&exp_vals) * v.transpose())
}

/// Maximum absolute column sum (operator norm induced by l1).
pub fn norm_1<T: Real>(m: &DMatrix<T>) -> T {
    m.column_iter()
        .map(|c| c.iter().fold(T::zero(), |acc, x| acc + x.abs()))
        .fold(T::zero(), crate::scalar::max_of)
}

/// Maximum absolute row sum (operator norm induced by l-infinity).
pub fn norm_inf<T: Real>(m: &DMatrix<T>) -> T {
    m.row_iter()
        .map(|r| r.iter().fold(T::zero(), |acc, x| acc + x.abs()))
        .fold(T::zero(), crate::scalar::max_of)
}

/// Largest singular value (operator norm induced by l2).
pub fn norm_2<T: Real>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(T::zero(), crate::scalar::max_of)
}

pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().map(|x| x.abs()).fold(T::zero(), crate::scalar::max_of)
}

/// Orthonormal basis of the null space of a square matrix; singular values
/// at or below `tol` count as zero.
pub fn null_space<T: Real>(m: &DMatrix<T>, tol: T) -> Vec<DVector<T>> {
    let n = m.ncols();
    // Pad to square so that V^T carries a full basis of the domain.
    let square = if m.nrows() >= n {
        m.clone()
    } else {
        let mut padded = DMatrix::zeros(n, n);
        padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        padded
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect()
}

/// Numerical rank: count of singular values above `tol`.
pub fn rank<T: Real>(m: &DMatrix<T>, tol: T) -> usize {
    if m.is_empty() {
        return 0;
    }
    m.clone().singular_values().iter().filter(|s| **s > tol).count()
}
