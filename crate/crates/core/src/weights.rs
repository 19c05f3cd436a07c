//! Weight functions `b(s)`, membership in the class 𝒲, and the
//! unique-ergodicity and weighted-convergence checks built on them.
//!
//! A weight is a positive function on `(0, ∞)` whose integral over `[0, t]`
//! diverges. It belongs to 𝒲 when for every shift `s > 0`
//!
//! ```text
//! r(s, t) = ∫_s^t |b(u) - b(u - s)| du / ∫_0^t b(u) du  ->  0   (t -> ∞).
//! ```
//!
//! Catalog forms carry an analytic verdict. Tabulated weights and products
//! that fail the closure hypotheses fall back to a numerical table of
//! `r(s, t)`, and the verdict may honestly be `Unknown`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::linalg::{rank, rank as matrix_rank};
use crate::quadrature::{integrate, integrate_power_singular, QuadResult, QuadSettings};
use crate::scalar::{lit, max_of, min_of, Real};
use crate::semigroup::{Semigroup, StationaryPoints};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassVerdict {
    InW,
    NotInW,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightForm<T: Real> {
    Constant { c: T },
    /// `s^alpha`, `alpha > -1`.
    Power { alpha: T },
    /// `s^beta * ln(1 + s)^gamma`, `beta, gamma >= 0`.
    PowerLog { beta: T, gamma: T },
    /// `e^(rate * s)`, `rate >= 0`.
    Exponential { rate: T },
    /// Piecewise-linear through `(s, b(s))`, constant outside the samples.
    Tabulated { samples: Vec<(T, T)> },
    Scaled { lambda: T, inner: Box<Weight<T>> },
    Sum { left: Box<Weight<T>>, right: Box<Weight<T>> },
    Product { left: Box<Weight<T>>, right: Box<Weight<T>> },
}

/// A weight together with its class-𝒲 verdict and the reason for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight<T: Real> {
    form: WeightForm<T>,
    verdict: ClassVerdict,
    evidence: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Combine<T: Real> {
    Scale(T),
    Sum,
    Product,
}

impl<T: Real> Weight<T> {
    pub fn constant(c: T) -> Result<Self> {
        if c <= T::zero() {
            return Err(input("constant weight must be positive"));
        }
        Ok(Self::catalog(WeightForm::Constant { c }, ClassVerdict::InW, "constant"))
    }

    pub fn power(alpha: T) -> Result<Self> {
        if alpha <= -T::one() {
            return Err(input("power weight needs alpha > -1"));
        }
        Ok(Self::catalog(
            WeightForm::Power { alpha },
            ClassVerdict::InW,
            "power s^alpha with alpha > -1 is eventually monotone",
        ))
    }

    pub fn power_log(beta: T, gamma: T) -> Result<Self> {
        if beta < T::zero() || gamma < T::zero() {
            return Err(input("power-log weight needs beta, gamma >= 0"));
        }
        Ok(Self::catalog(
            WeightForm::PowerLog { beta, gamma },
            ClassVerdict::InW,
            "power-log weight is nondecreasing",
        ))
    }

    pub fn exponential(rate: T) -> Result<Self> {
        if rate < T::zero() {
            return Err(input("exponential weight needs rate >= 0 (integral must diverge)"));
        }
        if rate == T::zero() {
            return Ok(Self::catalog(WeightForm::Exponential { rate }, ClassVerdict::InW, "rate 0 is constant"));
        }
        Ok(Self::catalog(
            WeightForm::Exponential { rate },
            ClassVerdict::NotInW,
            "r(s, t) -> 1 - exp(-rate * s) > 0",
        ))
    }

    /// Samples must have strictly increasing positive abscissae and positive
    /// values.
    pub fn tabulated(mut samples: Vec<(T, T)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(input("tabulated weight needs at least one sample"));
        }
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        if samples.iter().any(|(s, b)| *s < T::zero() || *b <= T::zero() || !b.is_finite()) {
            return Err(input("tabulated weight needs s >= 0 and finite positive values"));
        }
        if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(input("tabulated abscissae must be distinct"));
        }
        // Find the earliest sample from which the values are monotone.
        let n = samples.len();
        let mut start_up = n - 1;
        while start_up > 0 && samples[start_up - 1].1 <= samples[start_up].1 {
            start_up -= 1;
        }
        let mut start_down = n - 1;
        while start_down > 0 && samples[start_down - 1].1 >= samples[start_down].1 {
            start_down -= 1;
        }
        let (branch, start) = if start_up <= start_down {
            ("nondecreasing", start_up)
        } else {
            ("nonincreasing", start_down)
        };
        let evidence = format!(
            "{branch} for s >= {} (constant beyond the last sample)",
            crate::scalar::to_f64(samples[start].0)
        );
        Ok(Self {
            form: WeightForm::Tabulated { samples },
            verdict: ClassVerdict::InW,
            evidence,
        })
    }

    fn catalog(form: WeightForm<T>, verdict: ClassVerdict, evidence: &str) -> Self {
        Self {
            form,
            verdict,
            evidence: evidence.to_string(),
        }
    }

    pub fn form(&self) -> &WeightForm<T> {
        &self.form
    }

    pub fn verdict(&self) -> ClassVerdict {
        self.verdict
    }

    pub fn evidence(&self) -> &str {
        &self.evidence
    }

    /// Catalog forms whose verdict needs no numerical evidence.
    pub fn is_catalog(&self) -> bool {
        matches!(
            self.form,
            WeightForm::Constant { .. }
                | WeightForm::Power { .. }
                | WeightForm::PowerLog { .. }
                | WeightForm::Exponential { .. }
        )
    }

    /// Positive constant times the constant weight: averages reduce to the
    /// plain Cesàro mean.
    pub fn is_constant(&self) -> bool {
        match &self.form {
            WeightForm::Constant { .. } => true,
            WeightForm::Power { alpha } => *alpha == T::zero(),
            WeightForm::PowerLog { beta, gamma } => *beta == T::zero() && *gamma == T::zero(),
            WeightForm::Exponential { rate } => *rate == T::zero(),
            WeightForm::Scaled { inner, .. } => inner.is_constant(),
            _ => false,
        }
    }

    pub fn eval(&self, s: T) -> T {
        match &self.form {
            WeightForm::Constant { c } => *c,
            WeightForm::Power { alpha } => pow0(s, *alpha),
            WeightForm::PowerLog { beta, gamma } => pow0(s, *beta) * pow0((T::one() + s).ln(), *gamma),
            WeightForm::Exponential { rate } => (*rate * s).exp(),
            WeightForm::Tabulated { samples } => interpolate(samples, s),
            WeightForm::Scaled { lambda, inner } => *lambda * inner.eval(s),
            WeightForm::Sum { left, right } => left.eval(s) + right.eval(s),
            WeightForm::Product { left, right } => left.eval(s) * right.eval(s),
        }
    }

    /// Exponent `a <= 0` of the integrable singularity `b(s) ~ s^a` at 0.
    pub fn singular_exponent(&self) -> T {
        match &self.form {
            WeightForm::Power { alpha } => min_of(*alpha, T::zero()),
            WeightForm::Scaled { inner, .. } => inner.singular_exponent(),
            WeightForm::Sum { left, right } => min_of(left.singular_exponent(), right.singular_exponent()),
            WeightForm::Product { left, right } => left.singular_exponent() + right.singular_exponent(),
            _ => T::zero(),
        }
    }

    /// `b(s) * s^(-a)` with `a = singular_exponent()`; bounded near 0.
    pub fn regular_part(&self, s: T) -> T {
        let a = self.singular_exponent();
        match &self.form {
            WeightForm::Power { alpha } if *alpha < T::zero() => T::one(),
            WeightForm::Scaled { lambda, inner } => *lambda * inner.regular_part(s),
            WeightForm::Sum { left, right } => {
                left.regular_part(s) * pow0(s, left.singular_exponent() - a)
                    + right.regular_part(s) * pow0(s, right.singular_exponent() - a)
            }
            WeightForm::Product { left, right } => left.regular_part(s) * right.regular_part(s),
            _ => self.eval(s),
        }
    }

    /// `(inf, sup)` of `b` over `(0, ∞)`.
    pub fn range(&self) -> (T, T) {
        let inf = lit::<T>(f64::INFINITY);
        match &self.form {
            WeightForm::Constant { c } => (*c, *c),
            WeightForm::Power { alpha } if *alpha == T::zero() => (T::one(), T::one()),
            WeightForm::Power { .. } => (T::zero(), inf),
            WeightForm::PowerLog { beta, gamma } if *beta == T::zero() && *gamma == T::zero() => {
                (T::one(), T::one())
            }
            WeightForm::PowerLog { .. } => (T::zero(), inf),
            WeightForm::Exponential { rate } if *rate == T::zero() => (T::one(), T::one()),
            WeightForm::Exponential { .. } => (T::one(), inf),
            WeightForm::Tabulated { samples } => samples.iter().fold((inf, T::zero()), |(lo, hi), (_, b)| {
                (min_of(lo, *b), max_of(hi, *b))
            }),
            WeightForm::Scaled { lambda, inner } => {
                let (lo, hi) = inner.range();
                (*lambda * lo, *lambda * hi)
            }
            WeightForm::Sum { left, right } => {
                let (a, b) = left.range();
                let (c, d) = right.range();
                (a + c, b + d)
            }
            WeightForm::Product { left, right } => {
                let (a, b) = left.range();
                let (c, d) = right.range();
                (a * c, b * d)
            }
        }
    }

    fn bounded_below_and_above(&self) -> bool {
        let (lo, hi) = self.range();
        lo > T::zero() && hi.is_finite()
    }

    /// `∫_0^t b(s) ds` by quadrature (graded mesh when singular at 0).
    pub fn integral(&self, t: T, quad: &QuadSettings<T>) -> QuadResult<T, T> {
        let r = self.integrate_against(t, quad, |_| DVector::from_element(1, T::one()));
        QuadResult {
            value: r.value[0],
            error_estimate: r.error_estimate,
            subintervals: r.subintervals,
            converged: r.converged,
        }
    }

    /// `∫_0^t b(s) g(s) ds` for a bounded vector-valued `g`.
    pub(crate) fn integrate_against<F>(&self, t: T, quad: &QuadSettings<T>, g: F) -> QuadResult<DVector<T>, T>
    where
        F: Fn(T) -> DVector<T>,
    {
        let a = self.singular_exponent();
        if a < T::zero() {
            integrate_power_singular(a, t, |s| g(s) * self.regular_part(s), quad)
        } else {
            integrate(|s| g(s) * self.eval(s), T::zero(), t, quad)
        }
    }
}

/// `x^p` with the conventions `0^0 = 1`, `0^p = 0` for `p > 0`.
fn pow0<T: Real>(x: T, p: T) -> T {
    if p == T::zero() {
        T::one()
    } else if x == T::zero() {
        if p > T::zero() {
            T::zero()
        } else {
            lit(f64::INFINITY)
        }
    } else {
        x.powf(p)
    }
}

fn interpolate<T: Real>(samples: &[(T, T)], s: T) -> T {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if s <= first.0 {
        return first.1;
    }
    if s >= last.0 {
        return last.1;
    }
    let idx = samples.partition_point(|(x, _)| *x <= s);
    let (x0, y0) = samples[idx - 1];
    let (x1, y1) = samples[idx];
    y0 + (y1 - y0) * (s - x0) / (x1 - x0)
}

/// Closure operations on weights: positive scaling, sums, and products of
/// bounded weights with positive infimum preserve 𝒲.
pub fn combine<T: Real>(op: Combine<T>, args: &[Weight<T>]) -> Result<Weight<T>> {
    match op {
        Combine::Scale(lambda) => {
            let [inner] = args else {
                return Err(input("scaling takes exactly one weight"));
            };
            if lambda <= T::zero() {
                return Err(input("scale factor must be positive"));
            }
            Ok(Weight {
                form: WeightForm::Scaled {
                    lambda,
                    inner: Box::new(inner.clone()),
                },
                verdict: inner.verdict,
                evidence: format!("positive multiple of: {}", inner.evidence),
            })
        }
        Combine::Sum => {
            let [left, right] = args else {
                return Err(input("sum takes exactly two weights"));
            };
            let (verdict, evidence) = if left.verdict == ClassVerdict::InW && right.verdict == ClassVerdict::InW {
                (ClassVerdict::InW, "sum of two members of W".to_string())
            } else {
                (ClassVerdict::Unknown, "sum with a summand not known to be in W".to_string())
            };
            Ok(Weight {
                form: WeightForm::Sum {
                    left: Box::new(left.clone()),
                    right: Box::new(right.clone()),
                },
                verdict,
                evidence,
            })
        }
        Combine::Product => {
            let [left, right] = args else {
                return Err(input("product takes exactly two weights"));
            };
            let both_in = left.verdict == ClassVerdict::InW && right.verdict == ClassVerdict::InW;
            let bounded = left.bounded_below_and_above() && right.bounded_below_and_above();
            let (verdict, evidence) = if both_in && bounded {
                (ClassVerdict::InW, "product of bounded members of W with positive infimum".to_string())
            } else if !bounded {
                (
                    ClassVerdict::Unknown,
                    "product hypothesis fails: a factor is unbounded or has zero infimum".to_string(),
                )
            } else {
                (ClassVerdict::Unknown, "product with a factor not known to be in W".to_string())
            };
            Ok(Weight {
                form: WeightForm::Product {
                    left: Box::new(left.clone()),
                    right: Box::new(right.clone()),
                },
                verdict,
                evidence,
            })
        }
    }
}

/// One entry of the numerical `r(s, t)` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow<T: Real> {
    pub s: T,
    pub t: T,
    pub ratio: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport<T: Real> {
    pub verdict: ClassVerdict,
    /// The verdict came from the catalog or the closure rules.
    pub analytic: bool,
    pub evidence: String,
    pub table: Vec<RatioRow<T>>,
    /// Analytic value of `lim r(s, t)` per shift, where known.
    pub limits: Vec<(T, T)>,
}

impl<T: Real> ClassReport<T> {
    /// Numerical `r(s, t)` at the largest `t` for shift `s`.
    pub fn final_ratio(&self, s: T) -> Option<T> {
        self.table.iter().filter(|r| r.s == s).last().map(|r| r.ratio)
    }
}

pub fn default_shift_samples<T: Real>() -> Vec<T> {
    vec![lit(0.5), lit(1.0), lit(2.0)]
}

pub fn default_t_sequence<T: Real>() -> Vec<T> {
    vec![lit(10.0), lit(30.0), lit(100.0), lit(300.0)]
}

pub const DEFAULT_CLASS_TOL: f64 = 1e-2;

/// `r(s, t)` by quadrature.
pub fn shift_ratio<T: Real>(b: &Weight<T>, s: T, t: T, quad: &QuadSettings<T>) -> T {
    let denom = b.integral(t, quad).value;
    if t <= s {
        return T::zero();
    }
    let len = t - s;
    let a = b.singular_exponent();
    let numer = if a < T::zero() {
        // |b(v+s) - b(v)| = v^a |b(v+s) v^(-a) - regular(v)|
        integrate_power_singular(
            a,
            len,
            |v| DVector::from_element(1, (b.eval(v + s) * pow0(v, -a) - b.regular_part(v)).abs()),
            quad,
        )
        .value[0]
    } else {
        integrate(
            |v| DVector::from_element(1, (b.eval(v + s) - b.eval(v)).abs()),
            T::zero(),
            len,
            quad,
        )
        .value[0]
    };
    numer / denom
}

/// Class-𝒲 test. Analytic verdicts short-circuit; otherwise the table
/// decides: `InW` if every ratio at the final `t` is below `tol`, `NotInW`
/// if some shift's ratio has settled above `10 tol` over the last three
/// `t` values, `Unknown` otherwise. The table is always computed.
pub fn is_in_class_w<T: Real>(
    b: &Weight<T>,
    s_samples: &[T],
    t_sequence: &[T],
    tol: T,
) -> Result<ClassReport<T>> {
    if s_samples.is_empty() || s_samples.iter().any(|s| *s <= T::zero()) {
        return Err(input("shift samples must be nonempty and positive"));
    }
    if t_sequence.is_empty() || t_sequence.iter().any(|t| *t <= T::zero()) {
        return Err(input("t sequence must be nonempty and positive"));
    }
    if t_sequence.windows(2).any(|w| w[0] >= w[1]) {
        return Err(input("t sequence must be strictly increasing"));
    }
    if t_sequence[t_sequence.len() - 1] < t_sequence[0] * lit(10.0) {
        return Err(input("last t must be at least 10x the first"));
    }
    let quad = QuadSettings {
        abs_tol: lit(1e-9),
        rel_tol: lit(1e-9),
        ..QuadSettings::default()
    };
    let mut table = Vec::with_capacity(s_samples.len() * t_sequence.len());
    for &s in s_samples {
        for &t in t_sequence {
            table.push(RatioRow {
                s,
                t,
                ratio: shift_ratio(b, s, t, &quad),
            });
        }
    }
    let limits = match b.form {
        WeightForm::Exponential { rate } if rate > T::zero() => {
            s_samples.iter().map(|&s| (s, T::one() - (-rate * s).exp())).collect()
        }
        _ => Vec::new(),
    };

    if b.verdict != ClassVerdict::Unknown {
        return Ok(ClassReport {
            verdict: b.verdict,
            analytic: true,
            evidence: b.evidence.clone(),
            table,
            limits,
        });
    }

    let ten: T = lit(10.0);
    let settle: T = lit(0.05);
    let n_t = t_sequence.len();
    let mut all_small = true;
    let mut settled_large = false;
    for &s in s_samples {
        let series: Vec<T> = table.iter().filter(|r| r.s == s).map(|r| r.ratio).collect();
        if series[n_t - 1] >= tol {
            all_small = false;
        }
        if n_t >= 3 {
            let tail = &series[n_t - 3..];
            let lo = tail.iter().copied().fold(lit::<T>(f64::INFINITY), min_of);
            let hi = tail.iter().copied().fold(T::zero(), max_of);
            if lo > ten * tol && hi - lo <= settle * hi {
                settled_large = true;
            }
        }
    }
    let (verdict, evidence) = if all_small {
        (ClassVerdict::InW, "all ratios below tolerance at the final t")
    } else if settled_large {
        (ClassVerdict::NotInW, "a ratio settled above 10x tolerance")
    } else {
        (ClassVerdict::Unknown, "ratios neither vanished nor settled")
    };
    Ok(ClassReport {
        verdict,
        analytic: false,
        evidence: evidence.to_string(),
        table,
        limits,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum UniqueErgodicity<T: Real> {
    UniquelyErgodic { x0: DVector<T> },
    NotUnique,
    NoFixedPoint,
}

pub fn unique_ergodicity_check<T: Real>(sg: &Semigroup<T>, tol: T) -> UniqueErgodicity<T> {
    match sg.stationary_points(tol) {
        StationaryPoints::Unique { x0 } => UniqueErgodicity::UniquelyErgodic { x0 },
        StationaryPoints::NonUnique { .. } => UniqueErgodicity::NotUnique,
        StationaryPoints::None => UniqueErgodicity::NoFixedPoint,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionCheck {
    pub holds: bool,
    /// Rank of the span of the columns of `I - T_t` over the samples.
    pub span_rank: usize,
    pub ambient_dim: usize,
    /// Whether the fixed point lies outside that span (`None` when the fixed
    /// point is not unique).
    pub fixed_point_outside: Option<bool>,
}

/// Whether `X = span{x0} (+) span ∪ (I - T_t)(X)` over the sampled times.
pub fn check_mean_ergodic_decomposition<T: Real>(
    sg: &Semigroup<T>,
    t_samples: &[T],
    tol: T,
) -> Result<DecompositionCheck> {
    if t_samples.is_empty() {
        return Err(input("need at least one time sample"));
    }
    let m = sg.space().ambient_dim();
    let x0 = match sg.stationary_points(tol) {
        StationaryPoints::None => {
            return Err(Error::Precondition("semigroup has no fixed point in the base".into()))
        }
        StationaryPoints::NonUnique { .. } => None,
        StationaryPoints::Unique { x0 } => Some(x0),
    };
    let mut span = DMatrix::zeros(m, m * t_samples.len());
    for (k, t) in t_samples.iter().enumerate() {
        let tt = sg.evolve(*t)?;
        let block = DMatrix::identity(m, m) - tt.matrix();
        span.view_mut((0, k * m), (m, m)).copy_from(&block);
    }
    let span_rank = rank(&span, tol);
    let fixed_point_outside = x0.map(|x0| {
        let mut aug = DMatrix::zeros(m, span.ncols() + 1);
        aug.view_mut((0, 0), (m, span.ncols())).copy_from(&span);
        aug.set_column(span.ncols(), &x0);
        matrix_rank(&aug, tol) == span_rank + 1
    });
    Ok(DecompositionCheck {
        holds: span_rank + 1 == m && fixed_point_outside == Some(true),
        span_rank,
        ambient_dim: m,
        fixed_point_outside,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow<T: Real> {
    pub t: T,
    pub deviation: T,
    pub quadrature_error: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedConvergence<T: Real> {
    pub rows: Vec<ConvergenceRow<T>>,
    pub x0: DVector<T>,
    /// Final deviation below the threshold and the tail nonincreasing.
    pub passed: bool,
}

pub const DEFAULT_CONVERGENCE_THRESHOLD: f64 = 0.1;

/// `||A_{b,t} x - f(x) x0||` along `t_grid`.
pub fn verify_weighted_convergence<T: Real>(
    sg: &Semigroup<T>,
    b: &Weight<T>,
    x: &DVector<T>,
    t_grid: &[T],
    quad: &QuadSettings<T>,
    threshold: T,
) -> Result<WeightedConvergence<T>> {
    if b.verdict() != ClassVerdict::InW {
        return Err(Error::Precondition(format!(
            "weight is not known to be in W ({:?})",
            b.verdict()
        )));
    }
    if t_grid.is_empty() {
        return Err(input("t grid must be nonempty"));
    }
    let space = sg.space();
    let fx = space.functional(x)?;
    let x0 = match sg.stationary_points(lit(1e-9)) {
        StationaryPoints::Unique { x0 } => x0,
        other => {
            return Err(Error::Precondition(format!(
                "semigroup is not uniquely ergodic: {other:?}"
            )))
        }
    };
    let target = &x0 * fx;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let avg = sg.weighted_average(b, t, quad)?;
        let dev = space.norm(&(avg.map.matrix() * x - &target))?;
        rows.push(ConvergenceRow {
            t,
            deviation: dev,
            quadrature_error: avg.error_estimate,
        });
    }
    let slack = lit::<T>(1e-9);
    let half = rows.len() / 2;
    let tail_nonincreasing = rows[half..]
        .windows(2)
        .all(|w| w[1].deviation <= w[0].deviation + slack);
    let passed = rows[rows.len() - 1].deviation < threshold && tail_nonincreasing;
    Ok(WeightedConvergence { rows, x0, passed })
}
