//! Seeded samplers used by the estimators that cannot be computed exactly.

use nalgebra::{Complex, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{lit, Real};

pub const DEFAULT_SAMPLES: usize = 4096;
pub const DEFAULT_REFINE_STEPS: usize = 100;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<T: Real, R: Rng>(rng: &mut R) -> T {
    let g: f64 = rng.sample(StandardNormal);
    lit(g)
}

/// Uniform point on the unit l2 sphere of `R^n`.
pub fn unit_sphere<T: Real, R: Rng>(rng: &mut R, n: usize) -> DVector<T> {
    loop {
        let v = DVector::from_fn(n, |_, _| gaussian::<T, R>(rng));
        let norm = v.norm();
        if norm > lit(1e-12) {
            return v / norm;
        }
    }
}

/// Haar-random state vector in `C^d` (normalized Gaussian coordinates).
pub fn pure_state<T: Real, R: Rng>(rng: &mut R, d: usize) -> DVector<Complex<T>> {
    loop {
        let v = DVector::from_fn(d, |_, _| Complex::new(gaussian::<T, R>(rng), gaussian::<T, R>(rng)));
        let norm = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if norm > lit(1e-12) {
            return v.map(|z| z / Complex::new(norm, T::zero()));
        }
    }
}

/// Basis vectors of `C^d` and the equal superpositions `(e_j + w e_k) / sqrt 2`
/// for `w` in `{1, -1, i, -i}`.
pub fn structured_states<T: Real>(d: usize) -> Vec<DVector<Complex<T>>> {
    let zero = Complex::new(T::zero(), T::zero());
    let h: T = lit(std::f64::consts::FRAC_1_SQRT_2);
    let mut out = Vec::with_capacity(d + 2 * d * d.saturating_sub(1));
    for j in 0..d {
        let mut e = DVector::from_element(d, zero);
        e[j] = Complex::new(T::one(), T::zero());
        out.push(e);
    }
    let phases = [
        Complex::new(h, T::zero()),
        Complex::new(-h, T::zero()),
        Complex::new(T::zero(), h),
        Complex::new(T::zero(), -h),
    ];
    for j in 0..d {
        for k in (j + 1)..d {
            for w in phases {
                let mut v = DVector::from_element(d, zero);
                v[j] = Complex::new(h, T::zero());
                v[k] = w;
                out.push(v);
            }
        }
    }
    out
}

/// Pairwise coordinate ascent over the real and imaginary parts of a pair of
/// state vectors. `score` is maximized; the best value seen is returned.
pub fn refine_pair<T: Real, F>(
    mut a: DVector<Complex<T>>,
    mut b: DVector<Complex<T>>,
    steps: usize,
    score: F,
) -> (T, DVector<Complex<T>>, DVector<Complex<T>>)
where
    F: Fn(&DVector<Complex<T>>, &DVector<Complex<T>>) -> T,
{
    let d = a.len();
    let mut best = score(&a, &b);
    let mut step: T = lit(0.25);
    let shrink: T = lit(0.6);
    for _ in 0..steps {
        let mut improved = false;
        for which in 0..2 {
            for k in 0..d {
                for part in 0..2 {
                    for sign in [T::one(), -T::one()] {
                        let delta = if part == 0 {
                            Complex::new(sign * step, T::zero())
                        } else {
                            Complex::new(T::zero(), sign * step)
                        };
                        let (ca, cb) = if which == 0 {
                            let mut c = a.clone();
                            c[k] += delta;
                            (c, b.clone())
                        } else {
                            let mut c = b.clone();
                            c[k] += delta;
                            (a.clone(), c)
                        };
                        let s = score(&ca, &cb);
                        if s > best {
                            best = s;
                            a = ca;
                            b = cb;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            step *= shrink;
            if step < lit(1e-12) {
                break;
            }
        }
    }
    (best, a, b)
}

/// Settings for seeded estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerSettings {
    pub n_samples: usize,
    pub seed: u64,
    pub refine_steps: usize,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_SAMPLES,
            seed: 0,
            refine_steps: DEFAULT_REFINE_STEPS,
        }
    }
}

impl SamplerSettings {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}
