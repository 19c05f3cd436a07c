#![allow(dead_code)]

use dobrushin::hermitian::CMatrix;
use dobrushin::{LinearMap, Role, Semigroup, StateSpace};
use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

/// Truncated Taylor series of `exp(a)`; stops once a term is below 1e-14
/// in max-entry norm. Only for small `|a|`.
pub fn taylor_expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..200 {
        term = &term * a / k as f64;
        sum += &term;
        if term.amax() < 1e-14 {
            break;
        }
    }
    sum
}

/// `exp(a)` via Taylor on `a / 2^s` followed by `s` squarings.
pub fn taylor_expm_scaled(a: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = a.amax() * a.nrows() as f64;
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let mut e = taylor_expm(&(a / 2f64.powi(s)));
    for _ in 0..s {
        e = &e * &e;
    }
    e
}

/// Composite Simpson rule with `panels` (even) panels.
pub fn simpson<F: Fn(f64) -> DMatrix<f64>>(f: F, a: f64, b: f64, panels: usize) -> DMatrix<f64> {
    assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + i as f64 * h) * w;
    }
    acc * (h / 3.0)
}

pub fn simpson_scalar<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    simpson(|s| DMatrix::from_element(1, 1, f(s)), a, b, panels)[(0, 0)]
}

pub fn two_state_q() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0])
}

pub fn perturbed_q() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[-1.1, 0.9, 1.1, -0.9])
}

pub fn classical_sg(q: DMatrix<f64>) -> Semigroup<f64> {
    let n = q.nrows();
    Semigroup::from_matrix(StateSpace::classical(n).unwrap(), q).unwrap()
}

/// `Pi + c (I - Pi)` with `Pi` the projection onto `(1/2, 1/2)`.
pub fn pi_plus(c: f64) -> DMatrix<f64> {
    let pi = DMatrix::from_element(2, 2, 0.5);
    &pi + (DMatrix::identity(2, 2) - &pi) * c
}

/// Q-matrix with off-diagonal rates uniform in `[lo, hi]`.
pub fn random_q<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            if i != j {
                let r = rng.random_range(lo..=hi);
                q[(i, j)] = r;
                col += r;
            }
        }
        q[(j, j)] = -col;
    }
    q
}

pub fn random_stochastic<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..1.0));
    for mut c in m.column_iter_mut() {
        let s = c.sum();
        c /= s;
    }
    m
}

pub fn random_simplex<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |_, _| -rng.random_range(1e-12f64..1.0).ln());
    let s = v.sum();
    v / s
}

pub fn rotation(theta: f64) -> DMatrix<f64> {
    let (c, s) = (theta.cos(), theta.sin());
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

pub fn depolarizing(p: f64) -> LinearMap<f64> {
    let space = StateSpace::quantum(2).unwrap();
    LinearMap::from_superoperator(space, Role::Markov, |x| {
        let tr = x[(0, 0)] + x[(1, 1)];
        x * Complex::new(1.0 - p, 0.0) + CMatrix::identity(2, 2) * (tr * Complex::new(p / 2.0, 0.0))
    })
    .unwrap()
}

pub fn cdiag(a: f64, b: f64) -> CMatrix<f64> {
    let mut x = CMatrix::from_element(2, 2, Complex::new(0.0, 0.0));
    x[(0, 0)] = Complex::new(a, 0.0);
    x[(1, 1)] = Complex::new(b, 0.0);
    x
}
