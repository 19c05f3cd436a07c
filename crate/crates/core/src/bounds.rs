//! Closed-form perturbation and ergodicity bounds, and their empirical
//! verification against two semigroups.
//!
//! Conventions: `T` is generated by `Q_T`, `S` by `Q_S = Q_T + B`. `rho` is
//! the contraction rate of a certificate for `T` at `t0`, and `[t / t0]` is
//! the floor.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dobrushin::{
    mean_ergodicity_certificate_with, stability_certificate_with, StabilityCertificate, DEFAULT_MARGIN,
};
use crate::error::{input, Error, Result};
use crate::sampling::SamplerSettings;
use crate::scalar::{floor_ratio, from_usize, lit, max_of, min_of, Real};
use crate::semigroup::{Semigroup, StationaryPoints};
use crate::spaces::{operator_norm_with, Estimate, StateSpace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInput<T: Real> {
    pub rho: T,
    pub t0: T,
    pub t: T,
    /// `||B||`.
    pub norm_b: T,
    /// `||x - z||`.
    pub dist_xz: T,
    /// `sup_{0 < t < t0} ||T_t - S_t||`.
    pub sup_early: T,
    /// `||T_t0 - S_t0||`, or the same for the Cesàro averages.
    pub delta_op: T,
}

impl<T: Real> Default for BoundInput<T> {
    fn default() -> Self {
        Self {
            rho: T::zero(),
            t0: T::one(),
            t: T::zero(),
            norm_b: T::zero(),
            dist_xz: T::zero(),
            sup_early: T::zero(),
            delta_op: T::zero(),
        }
    }
}

impl<T: Real> BoundInput<T> {
    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho)?;
        if !(self.t0 > T::zero()) {
            return Err(input("t0 must be positive"));
        }
        let fields = [
            ("t", self.t),
            ("norm_b", self.norm_b),
            ("dist_xz", self.dist_xz),
            ("sup_early", self.sup_early),
            ("delta_op", self.delta_op),
        ];
        for (name, v) in fields {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(input(format!("{name} must be finite and nonnegative")));
            }
        }
        Ok(())
    }

    fn k(&self) -> i32 {
        floor_ratio(self.t, self.t0)
    }

    /// `t - t0 [t / t0]`.
    fn remainder(&self) -> T {
        max_of(T::zero(), self.t - self.t0 * from_usize::<T>(self.k() as usize))
    }
}

fn check_rho<T: Real>(rho: T) -> Result<()> {
    if !(rho >= T::zero()) || !(rho < T::one()) {
        return Err(input("rho must lie in [0, 1)"));
    }
    Ok(())
}

/// `t0 (1 - rho^e) / (1 - rho)`.
fn geometric<T: Real>(rho: T, t0: T, e: i32) -> T {
    t0 * (T::one() - rho.powi(e)) / (T::one() - rho)
}

/// Exponent of the geometric sum in the Cesàro bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometricTail {
    /// `[t / t0] - 1`. Undershoots for `t` just above `t0`.
    #[default]
    Reduced,
    /// `[t / t0]`, which is what integrating `rho^[s / t0]` over `[0, t]`
    /// gives.
    Full,
}

/// Trajectory bound on `||T_t x - S_t z||`.
pub fn bound_trajectory<T: Real>(inp: &BoundInput<T>) -> Result<T> {
    inp.validate()?;
    if inp.t <= inp.t0 {
        return Ok(inp.dist_xz + inp.t * inp.norm_b);
    }
    Ok(trajectory_above(inp, inp.k()))
}

/// The same bound with exponent `[t / t0] - 1` in the geometric sum.
pub fn bound_trajectory_proof<T: Real>(inp: &BoundInput<T>) -> Result<T> {
    inp.validate()?;
    if inp.t <= inp.t0 {
        return Ok(inp.dist_xz + inp.t * inp.norm_b);
    }
    let k = inp.k();
    let pk = inp.rho.powi(k);
    Ok(pk * inp.dist_xz + (geometric(inp.rho, inp.t0, k - 1) + pk * inp.remainder()) * inp.norm_b)
}

fn trajectory_above<T: Real>(inp: &BoundInput<T>, k: i32) -> T {
    let pk = inp.rho.powi(k);
    pk * inp.dist_xz + (geometric(inp.rho, inp.t0, k) + pk * inp.remainder()) * inp.norm_b
}

/// Both branch formulas of [`bound_trajectory`] evaluated at `inp.t`:
/// `(dist + t ||B||, large-t branch)`.
pub fn bound_trajectory_branches<T: Real>(inp: &BoundInput<T>) -> Result<(T, T)> {
    inp.validate()?;
    Ok((inp.dist_xz + inp.t * inp.norm_b, trajectory_above(inp, inp.k())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupAndStationary<T: Real> {
    /// Bound on `sup_t ||T_t x - S_t z||`.
    pub sup_bound: T,
    /// Bound on `||x0 - z0||`.
    pub stationary_bound: T,
}

pub fn bound_sup_and_stationary<T: Real>(inp: &BoundInput<T>) -> Result<SupAndStationary<T>> {
    inp.validate()?;
    let stationary = inp.t0 * inp.norm_b / (T::one() - inp.rho);
    Ok(SupAndStationary {
        sup_bound: inp.dist_xz + stationary,
        stationary_bound: stationary,
    })
}

/// Bound on `||T_t x - S_t z||` from `||T_t0 - S_t0||` and the early-time gap.
pub fn bound_alternative<T: Real>(inp: &BoundInput<T>) -> Result<T> {
    inp.validate()?;
    let pk = inp.rho.powi(inp.k());
    Ok(pk * (inp.dist_xz + inp.sup_early) + (T::one() - pk) / (T::one() - inp.rho) * inp.delta_op)
}

/// `delta_op / (1 - rho - delta_op)`, valid when `delta_op < 1 - rho`.
pub fn bound_fixed_point_gap<T: Real>(rho: T, delta_op: T) -> Result<T> {
    check_rho(rho)?;
    if !(delta_op >= T::zero()) {
        return Err(input("delta_op must be nonnegative"));
    }
    let room = T::one() - rho - delta_op;
    if room <= T::zero() {
        return Err(Error::HypothesisNotMet(format!(
            "delta_op = {} is not below 1 - rho = {}",
            crate::scalar::to_f64(delta_op),
            crate::scalar::to_f64(T::one() - rho)
        )));
    }
    Ok(delta_op / room)
}

fn cesaro_factor<T: Real>(inp: &BoundInput<T>, tail: GeometricTail) -> Result<T> {
    inp.validate()?;
    if inp.t <= inp.t0 {
        return Err(Error::OutOfDomain("Cesàro bounds need t > t0".into()));
    }
    let k = inp.k();
    let e = match tail {
        GeometricTail::Reduced => k - 1,
        GeometricTail::Full => k,
    };
    Ok(geometric(inp.rho, inp.t0, e) + inp.rho.powi(k) * inp.remainder())
}

/// Bound on `||A_t(T) x - x0||` with `dist_xz = ||x - x0||`.
pub fn bound_cesaro_convergence<T: Real>(inp: &BoundInput<T>) -> Result<T> {
    bound_cesaro_convergence_with(inp, GeometricTail::Reduced)
}

pub fn bound_cesaro_convergence_with<T: Real>(inp: &BoundInput<T>, tail: GeometricTail) -> Result<T> {
    Ok(cesaro_factor(inp, tail)? / inp.t * inp.dist_xz)
}

/// Bound on `||A_t(T) x - A_t(S) z||`.
pub fn bound_cesaro_pair<T: Real>(inp: &BoundInput<T>) -> Result<T> {
    bound_cesaro_pair_with(inp, GeometricTail::Reduced)
}

pub fn bound_cesaro_pair_with<T: Real>(inp: &BoundInput<T>, tail: GeometricTail) -> Result<T> {
    Ok(cesaro_factor(inp, tail)? * (inp.norm_b + inp.dist_xz / inp.t))
}

/// `2 t0 / (t (1 - rho))`, bound on `sup_{x in K} ||A_t x - x0||`.
pub fn bound_mean_ergodic<T: Real>(rho: T, t0: T, t: T) -> Result<T> {
    check_rho(rho)?;
    if !(t0 > T::zero()) || !(t > T::zero()) {
        return Err(input("t0 and t must be positive"));
    }
    let two: T = lit(2.0);
    Ok(two * t0 / (t * (T::one() - rho)))
}

/// Bound on `||A_t(T) x - A_t(S) z||` from the Cesàro certificate of `T`
/// and `delta_op = ||A_t0(S) - A_t0(T)||`.
pub fn bound_mean_combined<T: Real>(rho: T, t0: T, t: T, delta_op: T) -> Result<T> {
    let gap = bound_fixed_point_gap(rho, delta_op)?;
    let two: T = lit(2.0);
    Ok(bound_mean_ergodic(rho, t0, t)? + two * t0 / (t * (T::one() - rho - delta_op)) + gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Eq1a,
    Eq1aProof,
    Eq5,
    Eq6,
    Eq12,
    Per62,
    Per72,
    CesaroConvergence,
    CesaroPair,
    MeanErgodic,
    MeanCombined,
}

impl BoundKind {
    pub const ALL: [BoundKind; 11] = [
        BoundKind::Eq1a,
        BoundKind::Eq1aProof,
        BoundKind::Eq5,
        BoundKind::Eq6,
        BoundKind::Eq12,
        BoundKind::Per62,
        BoundKind::Per72,
        BoundKind::CesaroConvergence,
        BoundKind::CesaroPair,
        BoundKind::MeanErgodic,
        BoundKind::MeanCombined,
    ];

    pub fn id(self) -> &'static str {
        match self {
            BoundKind::Eq1a => "eq1a",
            BoundKind::Eq1aProof => "eq1a_proof",
            BoundKind::Eq5 => "eq5",
            BoundKind::Eq6 => "eq6",
            BoundKind::Eq12 => "eq12",
            BoundKind::Per62 => "per62",
            BoundKind::Per72 => "per72",
            BoundKind::CesaroConvergence => "cesaro_convergence",
            BoundKind::CesaroPair => "cesaro_pair",
            BoundKind::MeanErgodic => "mean_ergodic",
            BoundKind::MeanCombined => "mean_combined",
        }
    }

    /// Whether the bound is built on a certificate for the Cesàro averages.
    pub fn uses_mean_certificate(self) -> bool {
        matches!(self, BoundKind::Per72 | BoundKind::MeanErgodic | BoundKind::MeanCombined)
    }

    /// Whether the left side references the fixed points `x0` or `z0`.
    pub fn needs_fixed_points(self) -> bool {
        matches!(
            self,
            BoundKind::Eq6
                | BoundKind::Per62
                | BoundKind::Per72
                | BoundKind::CesaroConvergence
                | BoundKind::MeanErgodic
        )
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| input(format!("unknown bound identifier '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySettings<T: Real> {
    pub tol: T,
    /// Candidate `t0` values for the certificate of `T`.
    pub certificate_grid: Vec<T>,
    pub margin: T,
    pub sampler: SamplerSettings,
    /// Uniform grid points on `[0, t0]` for the early-time gap.
    pub early_points: usize,
    /// Base points for sup-over-base left sides on sampled spaces.
    pub base_samples: usize,
    pub tail: GeometricTail,
}

impl<T: Real> Default for VerifySettings<T> {
    fn default() -> Self {
        Self {
            tol: lit(1e-9),
            certificate_grid: [0.25, 0.5, 1.0, 2.0, 4.0, 8.0].iter().map(|v| lit(*v)).collect(),
            margin: lit(DEFAULT_MARGIN),
            sampler: SamplerSettings::default(),
            early_points: 200,
            base_samples: 64,
            tail: GeometricTail::Reduced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow<T: Real> {
    pub t: T,
    pub actual: T,
    pub bound: T,
    pub slack: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T: Real> {
    pub kind: BoundKind,
    pub rows: Vec<BoundRow<T>>,
    pub tol: T,
    pub passed: bool,
    pub certificate: StabilityCertificate<T>,
    pub norm_b: Estimate<T>,
    pub delta_op: Option<T>,
    pub notes: Vec<String>,
}

impl<T: Real> BoundReport<T> {
    pub fn min_slack(&self) -> T {
        self.rows.iter().map(|r| r.slack).fold(lit(f64::INFINITY), min_of)
    }
}

struct Context<'a, T: Real> {
    space: &'a StateSpace<T>,
    settings: &'a VerifySettings<T>,
}

impl<T: Real> Context<'_, T> {
    fn opnorm(&self, m: &DMatrix<T>) -> Result<T> {
        Ok(operator_norm_with(self.space, m, &self.settings.sampler)?.value)
    }

    fn norm(&self, x: &DVector<T>) -> Result<T> {
        self.space.norm(x)
    }

    fn fixed_point(&self, sg: &Semigroup<T>, label: &str) -> Result<DVector<T>> {
        match sg.stationary_points(lit(1e-9)) {
            StationaryPoints::Unique { x0 } => Ok(x0),
            other => Err(Error::Precondition(format!(
                "{label} has no unique stationary point: {other:?}"
            ))),
        }
    }

    fn base_points(&self) -> Vec<DVector<T>> {
        let mut sampler = self.settings.sampler;
        sampler.n_samples = self.settings.base_samples;
        self.space.base_extreme_points(&sampler).points
    }
}

/// Evaluates `kind` on `t_grid` with ground truth from the matrices of
/// `sg_t` and `sg_s`. Rows pass when `bound - actual >= -tol`.
pub fn verify_bound<T: Real>(
    kind: BoundKind,
    sg_t: &Semigroup<T>,
    sg_s: &Semigroup<T>,
    x: &DVector<T>,
    z: &DVector<T>,
    t_grid: &[T],
    settings: &VerifySettings<T>,
) -> Result<BoundReport<T>> {
    let space = sg_t.space();
    if sg_s.space() != space {
        return Err(input("semigroups live on different spaces"));
    }
    let member_tol: T = lit(1e-9);
    if !space.is_in_base(x, member_tol)? || !space.is_in_base(z, member_tol)? {
        return Err(input("start points must lie in the base"));
    }
    if t_grid.iter().any(|t| !(*t >= T::zero())) {
        return Err(input("t grid must be nonnegative"));
    }
    let cx = Context { space, settings };

    let certificate = if kind.uses_mean_certificate() {
        mean_ergodicity_certificate_with(sg_t, &settings.certificate_grid, settings.margin, &settings.sampler)?
    } else {
        stability_certificate_with(sg_t, &settings.certificate_grid, settings.margin, &settings.sampler)?
    }
    .ok_or_else(|| Error::Precondition(format!("no certificate for {kind} on the certificate grid")))?;
    let (rho, t0) = (certificate.rho, certificate.t0);

    let b = sg_s.generator().matrix() - sg_t.generator().matrix();
    let norm_b = operator_norm_with(space, &b, &settings.sampler)?;
    let dist_xz = cx.norm(&(x - z))?;
    let base = BoundInput {
        rho,
        t0,
        norm_b: norm_b.value,
        dist_xz,
        ..BoundInput::default()
    };

    let mut notes = Vec::new();
    if !space.is_exact() {
        notes.push("operator norms and rho are sampled lower bounds".to_string());
    }
    let mut delta_op = None;
    let mut rows: Vec<(T, T, T)> = Vec::new();

    let trajectory_gap = |t: T| -> Result<T> {
        let tx = sg_t.evolve(t)?.apply(x)?;
        let sz = sg_s.evolve(t)?.apply(z)?;
        cx.norm(&(tx - sz))
    };

    match kind {
        BoundKind::Eq1a | BoundKind::Eq1aProof => {
            for &t in t_grid {
                let inp = BoundInput { t, ..base };
                let bound = if kind == BoundKind::Eq1a {
                    bound_trajectory(&inp)?
                } else {
                    bound_trajectory_proof(&inp)?
                };
                rows.push((t, trajectory_gap(t)?, bound));
            }
        }
        BoundKind::Eq5 => {
            let bound = bound_sup_and_stationary(&base)?.sup_bound;
            for &t in t_grid {
                rows.push((t, trajectory_gap(t)?, bound));
            }
        }
        BoundKind::Eq6 => {
            let x0 = cx.fixed_point(sg_t, "T")?;
            let z0 = cx.fixed_point(sg_s, "S")?;
            let bound = bound_sup_and_stationary(&base)?.stationary_bound;
            rows.push((t0, cx.norm(&(x0 - z0))?, bound));
        }
        BoundKind::Eq12 => {
            let d = cx.opnorm(&(sg_t.evolve_matrix(t0)? - sg_s.evolve_matrix(t0)?))?;
            delta_op = Some(d);
            // The early gap enters through r = t - t0 [t / t0]; include those
            // exact remainders alongside the uniform grid.
            let mut probes: Vec<T> = (0..=settings.early_points)
                .map(|i| t0 * from_usize::<T>(i) / from_usize::<T>(settings.early_points.max(1)))
                .collect();
            probes.extend(t_grid.iter().map(|&t| BoundInput { t, ..base }.remainder()));
            let mut sup_early = T::zero();
            for r in probes {
                sup_early = max_of(sup_early, cx.opnorm(&(sg_t.evolve_matrix(r)? - sg_s.evolve_matrix(r)?))?);
            }
            for &t in t_grid {
                let inp = BoundInput {
                    t,
                    sup_early,
                    delta_op: d,
                    ..base
                };
                rows.push((t, trajectory_gap(t)?, bound_alternative(&inp)?));
            }
        }
        BoundKind::Per62 | BoundKind::Per72 => {
            let d = if kind == BoundKind::Per62 {
                cx.opnorm(&(sg_s.evolve_matrix(t0)? - sg_t.evolve_matrix(t0)?))?
            } else {
                cx.opnorm(&(sg_s.integral(t0)? / t0 - sg_t.integral(t0)? / t0))?
            };
            delta_op = Some(d);
            let bound = bound_fixed_point_gap(rho, d)?;
            let x0 = cx.fixed_point(sg_t, "T")?;
            let z0 = cx.fixed_point(sg_s, "S")?;
            rows.push((t0, cx.norm(&(x0 - z0))?, bound));
        }
        BoundKind::CesaroConvergence => {
            let x0 = cx.fixed_point(sg_t, "T")?;
            let dist = cx.norm(&(x - &x0))?;
            for &t in t_grid {
                if t <= t0 {
                    notes.push(format!("t = {} skipped: needs t > t0", crate::scalar::to_f64(t)));
                    continue;
                }
                let inp = BoundInput { t, dist_xz: dist, ..base };
                let actual = cx.norm(&(sg_t.cesaro_average(t)?.apply(x)? - &x0))?;
                rows.push((t, actual, bound_cesaro_convergence_with(&inp, settings.tail)?));
            }
        }
        BoundKind::CesaroPair => {
            for &t in t_grid {
                if t <= t0 {
                    notes.push(format!("t = {} skipped: needs t > t0", crate::scalar::to_f64(t)));
                    continue;
                }
                let inp = BoundInput { t, ..base };
                let ax = sg_t.cesaro_average(t)?.apply(x)?;
                let az = sg_s.cesaro_average(t)?.apply(z)?;
                rows.push((t, cx.norm(&(ax - az))?, bound_cesaro_pair_with(&inp, settings.tail)?));
            }
        }
        BoundKind::MeanErgodic => {
            let x0 = cx.fixed_point(sg_t, "T")?;
            let points = cx.base_points();
            for &t in t_grid {
                if t <= T::zero() {
                    continue;
                }
                let avg = sg_t.cesaro_average(t)?;
                let mut actual = T::zero();
                for u in &points {
                    actual = max_of(actual, cx.norm(&(avg.apply(u)? - &x0))?);
                }
                rows.push((t, actual, bound_mean_ergodic(rho, t0, t)?));
            }
        }
        BoundKind::MeanCombined => {
            let d = cx.opnorm(&(sg_s.integral(t0)? / t0 - sg_t.integral(t0)? / t0))?;
            delta_op = Some(d);
            notes.push("left side evaluated at the row's t".to_string());
            let points = cx.base_points();
            for &t in t_grid {
                if t <= T::zero() {
                    continue;
                }
                let bound = bound_mean_combined(rho, t0, t, d)?;
                let at = sg_t.cesaro_average(t)?;
                let as_ = sg_s.cesaro_average(t)?;
                let images_t: Vec<DVector<T>> = points.iter().map(|u| at.apply(u)).collect::<Result<_>>()?;
                let images_s: Vec<DVector<T>> = points.iter().map(|u| as_.apply(u)).collect::<Result<_>>()?;
                let mut actual = T::zero();
                for a in &images_t {
                    for b in &images_s {
                        actual = max_of(actual, cx.norm(&(a - b))?);
                    }
                }
                rows.push((t, actual, bound));
            }
        }
    }

    let tol = settings.tol;
    let rows: Vec<BoundRow<T>> = rows
        .into_iter()
        .map(|(t, actual, bound)| {
            let slack = bound - actual;
            BoundRow {
                t,
                actual,
                bound,
                slack,
                pass: slack >= -tol,
            }
        })
        .collect();
    let passed = rows.iter().all(|r| r.pass);
    Ok(BoundReport {
        kind,
        rows,
        tol,
        passed,
        certificate,
        norm_b,
        delta_op,
        notes,
    })
}
