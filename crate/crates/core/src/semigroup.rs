//! Markov semigroups `T_t = exp(t Q)` and their time averages.

use nalgebra::{DMatrix, DVector};

use crate::error::{input, Error, Result};
use crate::linalg::{expm, null_space};
use crate::quadrature::{integrate, QuadSettings};
use crate::scalar::{lit, max_of, Real};
use crate::spaces::{validate_generator, LinearMap, Role, StateSpace, ValidationReport, DEFAULT_TOL};
use crate::weights::Weight;

/// Probe times at which non-classical generators are certified.
pub const DEFAULT_PROBES: [f64; 3] = [0.1, 1.0, 10.0];

#[derive(Debug, Clone)]
pub struct Semigroup<T: Real> {
    generator: LinearMap<T>,
    validation: ValidationReport<T>,
}

/// A time average together with its quadrature error estimate.
#[derive(Debug, Clone)]
pub struct Averaged<T: Real> {
    pub map: LinearMap<T>,
    /// Max-entry error estimate of the normalized average; zero when exact.
    pub error_estimate: T,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StationaryPoints<T: Real> {
    Unique { x0: DVector<T> },
    NonUnique { nullity: usize },
    None,
}

impl<T: Real> Semigroup<T> {
    /// Validates `generator` at the default tolerance and probe times.
    pub fn new(generator: LinearMap<T>) -> Result<Self> {
        Self::with_tolerance(generator, lit(DEFAULT_TOL))
    }

    pub fn with_tolerance(generator: LinearMap<T>, tol: T) -> Result<Self> {
        let probes: Vec<T> = DEFAULT_PROBES.iter().map(|p| lit(*p)).collect();
        let validation = validate_generator(&generator, tol, &probes)?;
        if !validation.passed {
            return Err(input(format!("invalid generator: {}", validation.summary())));
        }
        Ok(Self {
            generator: generator.with_role(Role::Generator),
            validation,
        })
    }

    pub fn from_matrix(space: StateSpace<T>, q: DMatrix<T>) -> Result<Self> {
        Self::new(LinearMap::new(space, q, Role::Generator)?)
    }

    pub fn space(&self) -> &StateSpace<T> {
        self.generator.space()
    }

    pub fn generator(&self) -> &LinearMap<T> {
        &self.generator
    }

    pub fn validation(&self) -> &ValidationReport<T> {
        &self.validation
    }

    fn wrap(&self, m: DMatrix<T>) -> LinearMap<T> {
        LinearMap::new(self.space().clone(), m, Role::Markov).expect("dimensions match the generator")
    }

    pub(crate) fn evolve_matrix(&self, t: T) -> Result<DMatrix<T>> {
        if t < T::zero() {
            return Err(input("evolution time must be nonnegative"));
        }
        expm(&(self.generator.matrix() * t))
    }

    pub fn evolve(&self, t: T) -> Result<LinearMap<T>> {
        Ok(self.wrap(self.evolve_matrix(t)?))
    }

    /// `∫_0^t T_s ds`, the upper-right block of `exp(t [[Q, I], [0, 0]])`.
    pub fn integral(&self, t: T) -> Result<DMatrix<T>> {
        if t < T::zero() {
            return Err(input("integration time must be nonnegative"));
        }
        let m = self.space().ambient_dim();
        let mut aug = DMatrix::zeros(2 * m, 2 * m);
        aug.view_mut((0, 0), (m, m)).copy_from(&(self.generator.matrix() * t));
        aug.view_mut((0, m), (m, m)).fill_diagonal(t);
        let e = expm(&aug)?;
        Ok(e.view((0, m), (m, m)).into_owned())
    }

    pub fn cesaro_average(&self, t: T) -> Result<LinearMap<T>> {
        if t <= T::zero() {
            return Err(input("Cesàro average needs t > 0"));
        }
        Ok(self.wrap(self.integral(t)? / t))
    }

    /// `(∫_0^t b)^{-1} ∫_0^t b(s) T_s ds`. Constant weights go through
    /// `cesaro_average` and are exact.
    pub fn weighted_average(&self, b: &Weight<T>, t: T, quad: &QuadSettings<T>) -> Result<Averaged<T>> {
        if t <= T::zero() {
            return Err(input("weighted average needs t > 0"));
        }
        if b.is_constant() {
            return Ok(Averaged {
                map: self.cesaro_average(t)?,
                error_estimate: T::zero(),
                converged: true,
            });
        }
        let m = self.space().ambient_dim();
        let q = self.generator.matrix();
        let overflow = std::cell::Cell::new(None);
        let r = b.integrate_against(t, quad, |s| {
            let mut out = DVector::zeros(m * m + 1);
            match expm(&(q * s)) {
                Ok(e) => out.rows_mut(0, m * m).copy_from_slice(e.as_slice()),
                Err(err) => overflow.set(Some(err)),
            }
            out[m * m] = T::one();
            out
        });
        if let Some(err) = overflow.into_inner() {
            return Err(err);
        }
        finish_average(self, r.value, r.error_estimate, r.converged)
    }

    /// `(1/t) ∫_0^t T_{s^2} ds` by direct quadrature.
    pub fn time_squared_average(&self, t: T, quad: &QuadSettings<T>) -> Result<Averaged<T>> {
        if t <= T::zero() {
            return Err(input("time-squared average needs t > 0"));
        }
        let m = self.space().ambient_dim();
        let q = self.generator.matrix();
        let overflow = std::cell::Cell::new(None);
        let r = integrate(
            |s| {
                let mut out = DVector::zeros(m * m + 1);
                match expm(&(q * (s * s))) {
                    Ok(e) => out.rows_mut(0, m * m).copy_from_slice(e.as_slice()),
                    Err(err) => overflow.set(Some(err)),
                }
                out[m * m] = T::one();
                out
            },
            T::zero(),
            t,
            quad,
        );
        if let Some(err) = overflow.into_inner() {
            return Err(err);
        }
        finish_average(self, r.value, r.error_estimate, r.converged)
    }

    /// The same average as `A_{b,t^2}` with `b(u) = 1 / (2 sqrt u)`.
    pub fn time_squared_average_substituted(&self, t: T, quad: &QuadSettings<T>) -> Result<Averaged<T>> {
        let half_inv_sqrt = crate::weights::combine(
            crate::weights::Combine::Scale(lit(0.5)),
            &[Weight::power(lit(-0.5))?],
        )?;
        self.weighted_average(&half_inv_sqrt, t * t, quad)
    }

    /// Fixed points of the semigroup in the base: the null space of `Q`
    /// (singular values up to `tol * max(1, |Q|_max)`) normalized by `f`.
    pub fn stationary_points(&self, tol: T) -> StationaryPoints<T> {
        let q = self.generator.matrix();
        let scale = max_of(T::one(), crate::linalg::max_abs(q));
        let kernel = null_space(q, tol * scale);
        match kernel.len() {
            0 => StationaryPoints::None,
            1 => {
                let space = self.space();
                let v = &kernel[0];
                let fv = space.functional_row().dot(v);
                if fv.abs() <= lit(1e-12) {
                    return StationaryPoints::None;
                }
                let x0 = v / fv;
                let member_tol = max_of(tol, lit(1e-8));
                if space.is_in_base(&x0, member_tol).unwrap_or(false) {
                    StationaryPoints::Unique { x0 }
                } else {
                    StationaryPoints::None
                }
            }
            nullity => StationaryPoints::NonUnique { nullity },
        }
    }
}

fn finish_average<T: Real>(
    sg: &Semigroup<T>,
    value: DVector<T>,
    error: T,
    converged: bool,
) -> Result<Averaged<T>> {
    let m = sg.space().ambient_dim();
    let norm = value[m * m];
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(input("weight integral over [0, t] is not positive and finite"));
    }
    let mat = DMatrix::from_column_slice(m, m, value.rows(0, m * m).as_slice()) / norm;
    Ok(Averaged {
        map: sg.wrap(mat),
        error_estimate: error / norm,
        converged,
    })
}

/// Residual of `S_t x - T_t x - ∫_0^t T_{t-s} B S_s x ds` with `B = Q_S - Q_T`.
pub fn integral_identity_residual<T: Real>(
    sg_t: &Semigroup<T>,
    sg_s: &Semigroup<T>,
    x: &DVector<T>,
    t: T,
    quad: &QuadSettings<T>,
) -> Result<T> {
    if sg_t.space() != sg_s.space() {
        return Err(input("semigroups live on different spaces"));
    }
    if t < T::zero() {
        return Err(Error::Input("t must be nonnegative".into()));
    }
    let b = sg_s.generator.matrix() - sg_t.generator.matrix();
    let lhs = sg_s.evolve_matrix(t)? * x - sg_t.evolve_matrix(t)? * x;
    let qt = sg_t.generator.matrix();
    let qs = sg_s.generator.matrix();
    let conv = integrate(
        |s| {
            let left = expm(&(qt * (t - s))).unwrap_or_else(|_| DMatrix::zeros(qt.nrows(), qt.ncols()));
            let right = expm(&(qs * s)).unwrap_or_else(|_| DMatrix::zeros(qs.nrows(), qs.ncols()));
            left * (&b * (right * x))
        },
        T::zero(),
        t,
        quad,
    );
    sg_t.space().norm(&(lhs - conv.value))
}
