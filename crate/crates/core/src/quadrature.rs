//! Adaptive composite Simpson quadrature for vector-valued integrands.

use nalgebra::DVector;

use crate::scalar::{lit, max_of, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings<T: Real> {
    /// Absolute error target, distributed over subintervals by width.
    pub abs_tol: T,
    /// Relative error target per subinterval.
    pub rel_tol: T,
    pub max_subintervals: usize,
    /// Uniform panels the interval is split into before any refinement.
    pub initial_panels: usize,
}

impl<T: Real> Default for QuadSettings<T> {
    fn default() -> Self {
        Self {
            abs_tol: lit(1e-8),
            rel_tol: lit(1e-10),
            max_subintervals: 1 << 20,
            initial_panels: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult<V, T: Real> {
    pub value: V,
    /// Sum of the per-subinterval Richardson error estimates (max-norm).
    pub error_estimate: T,
    pub subintervals: usize,
    /// False when the subinterval cap stopped refinement.
    pub converged: bool,
}

struct Panel<T: Real> {
    a: T,
    b: T,
    fa: DVector<T>,
    fm: DVector<T>,
    fb: DVector<T>,
    whole: DVector<T>,
}

fn simpson<T: Real>(a: T, b: T, fa: &DVector<T>, fm: &DVector<T>, fb: &DVector<T>) -> DVector<T> {
    let six: T = lit(6.0);
    let four: T = lit(4.0);
    (fa + fm * four + fb) * ((b - a) / six)
}

/// Integrates `f` over `[a, b]`. Each subinterval is halved until the
/// difference between its one- and two-panel Simpson estimates meets the
/// local target.
pub fn integrate<T, F>(f: F, a: T, b: T, settings: &QuadSettings<T>) -> QuadResult<DVector<T>, T>
where
    T: Real,
    F: Fn(T) -> DVector<T>,
{
    let half: T = lit(0.5);
    let fifteen: T = lit(15.0);
    let total = b - a;
    let panels = settings.initial_panels.max(1);
    let width = total / crate::scalar::from_usize::<T>(panels);

    let mut stack: Vec<Panel<T>> = Vec::with_capacity(64);
    let mut left_f = f(a);
    for i in 0..panels {
        let pa = a + width * crate::scalar::from_usize::<T>(i);
        let pb = if i + 1 == panels { b } else { pa + width };
        let fm = f(half * (pa + pb));
        let fb = f(pb);
        let whole = simpson(pa, pb, &left_f, &fm, &fb);
        stack.push(Panel {
            a: pa,
            b: pb,
            fa: left_f,
            fm,
            fb: fb.clone(),
            whole,
        });
        left_f = fb;
    }
    // Process left to right.
    stack.reverse();

    let dim = stack[0].fa.len();
    let mut value = DVector::zeros(dim);
    let mut error = T::zero();
    let mut accepted = 0usize;
    let mut converged = true;

    while let Some(p) = stack.pop() {
        let mid = half * (p.a + p.b);
        let lm = f(half * (p.a + mid));
        let rm = f(half * (mid + p.b));
        let left = simpson(p.a, mid, &p.fa, &lm, &p.fm);
        let right = simpson(mid, p.b, &p.fm, &rm, &p.fb);
        let refined = &left + &right;
        let diff = &refined - &p.whole;
        let err = diff.amax() / fifteen;
        let local_tol = max_of(
            settings.abs_tol * ((p.b - p.a) / total).abs(),
            settings.rel_tol * refined.amax(),
        );
        let at_cap = accepted + 2 * (stack.len() + 2) > settings.max_subintervals;
        let too_narrow = mid <= p.a || mid >= p.b;
        if err <= local_tol || at_cap || too_narrow {
            if err > local_tol {
                converged = false;
            }
            value += refined + diff / fifteen;
            error += err;
            accepted += 2;
        } else {
            stack.push(Panel {
                a: mid,
                b: p.b,
                fa: p.fm.clone(),
                fm: rm,
                fb: p.fb,
                whole: right,
            });
            stack.push(Panel {
                a: p.a,
                b: mid,
                fa: p.fa,
                fm: lm,
                fb: p.fm,
                whole: left,
            });
        }
    }
    QuadResult {
        value,
        error_estimate: error,
        subintervals: accepted,
        converged,
    }
}

pub fn integrate_scalar<T, F>(f: F, a: T, b: T, settings: &QuadSettings<T>) -> QuadResult<T, T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let r = integrate(|s| DVector::from_element(1, f(s)), a, b, settings);
    QuadResult {
        value: r.value[0],
        error_estimate: r.error_estimate,
        subintervals: r.subintervals,
        converged: r.converged,
    }
}

/// `∫_0^len s^alpha h(s) ds` for `alpha > -1` and bounded `h`, evaluated on
/// the graded mesh `s = len * w^(1/(1+alpha))`, which turns the integrand
/// into the regular function `h` of `w`.
pub fn integrate_power_singular<T, F>(
    alpha: T,
    len: T,
    h: F,
    settings: &QuadSettings<T>,
) -> QuadResult<DVector<T>, T>
where
    T: Real,
    F: Fn(T) -> DVector<T>,
{
    let p = T::one() / (T::one() + alpha);
    let scale = p * len.powf(T::one() + alpha);
    let mut r = integrate(|w| h(len * w.powf(p)), T::zero(), T::one(), settings);
    r.value *= scale;
    r.error_estimate *= scale;
    r
}
