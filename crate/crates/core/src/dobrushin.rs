//! The Dobrushin ergodicity coefficient
//!
//! ```text
//! delta(T) = sup { ||T x|| / ||x|| : f(x) = 0, x != 0 } = 1/2 sup_{u, v in K} ||T u - T v||
//! ```
//!
//! and the stability and mean-ergodicity certificates derived from it.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::hermitian::trace_norm;
use crate::sampling::SamplerSettings;
use crate::scalar::{floor_ratio, lit, max_of, min_of, Real};
use crate::spaces::{
    operator_norm_with, sampled_sup, Estimate, EstimateMode, LinearMap, SpaceKind, StateSpace,
};
use crate::semigroup::Semigroup;

pub type DeltaResult<T> = Estimate<T>;

/// Margin below 1 a grid point's coefficient must clear to certify.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// Smallest contraction rate used to form the envelope when `rho` is 0.
const RHO_FLOOR: f64 = 1e-300;

pub fn delta<T: Real>(map: &LinearMap<T>) -> Result<DeltaResult<T>> {
    delta_with(map, &SamplerSettings::default())
}

pub fn delta_with<T: Real>(map: &LinearMap<T>, settings: &SamplerSettings) -> Result<DeltaResult<T>> {
    delta_of_matrix(map.space(), map.matrix(), settings)
}

/// `delta` of any square matrix on `space`, Markov or not.
pub fn delta_of_matrix<T: Real>(
    space: &StateSpace<T>,
    m: &DMatrix<T>,
    settings: &SamplerSettings,
) -> Result<DeltaResult<T>> {
    let dim = space.ambient_dim();
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if m.nrows() != dim { m.nrows() } else { m.ncols() },
        });
    }
    match space.kind() {
        SpaceKind::Classical { n } => {
            let half: T = lit(0.5);
            let mut best = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = (m.column(i) - m.column(j)).lp_norm(1);
                    best = max_of(best, half * d);
                }
            }
            Ok(Estimate::exact(best))
        }
        SpaceKind::DirectSum { inner_dim, inner_norm } => {
            // N = {(0, v)} carries the inner norm; its image has components
            // (row_0 . v, M v).
            let tail = m.view((0, 1), (1, inner_dim)).transpose();
            let lower = m.view((1, 1), (inner_dim, inner_dim)).into_owned();
            let tail_norm = inner_norm.dual().vector_norm(tail.as_slice());
            Ok(Estimate::exact(max_of(tail_norm, inner_norm.induced_norm(&lower))))
        }
        SpaceKind::Quantum { d } => {
            let basis = space.hermitian_basis().expect("quantum space carries a basis");
            let half: T = lit(0.5);
            let score = |a: &DVector<Complex<T>>, b: &DVector<Complex<T>>| {
                let diff = basis.pure_state(a) - basis.pure_state(b);
                half * trace_norm(&basis.matrix(&(m * diff)))
            };
            Ok(Estimate {
                value: sampled_sup(d, settings, score),
                mode: EstimateMode::SampledLowerBound {
                    n_samples: settings.n_samples,
                    seed: settings.seed,
                },
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    UniformAsymptotic,
    UniformMeanErgodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCertificate<T: Real> {
    pub t0: T,
    pub rho: T,
    pub envelope_c: T,
    pub envelope_alpha: T,
    pub kind: CertificateKind,
    pub mode: EstimateMode,
}

impl<T: Real> StabilityCertificate<T> {
    fn new(t0: T, rho: T, kind: CertificateKind, mode: EstimateMode) -> Self {
        let r = max_of(rho, lit(RHO_FLOOR));
        let two: T = lit(2.0);
        Self {
            t0,
            rho,
            envelope_c: two / r,
            envelope_alpha: (T::one() / r).ln() / t0,
            kind,
            mode,
        }
    }

    /// `rho^floor(t / t0)`.
    pub fn ceiling(&self, t: T) -> T {
        self.rho.powi(floor_ratio(t, self.t0))
    }

    /// `C exp(-alpha t)`.
    pub fn envelope(&self, t: T) -> T {
        self.envelope_c * (-self.envelope_alpha * t).exp()
    }

    /// `t0 / (t (1 - rho))`, the decay law of `delta(A_t)` for mean-ergodic
    /// certificates.
    pub fn mean_decay(&self, t: T) -> T {
        self.t0 / (t * (T::one() - self.rho))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupDelta<T: Real> {
    pub delta: DeltaResult<T>,
    /// `rho^floor(t / t0)` from an attached certificate.
    pub ceiling: Option<T>,
}

pub fn delta_of_semigroup<T: Real>(
    sg: &Semigroup<T>,
    t: T,
    certificate: Option<&StabilityCertificate<T>>,
) -> Result<SemigroupDelta<T>> {
    let delta = delta(&sg.evolve(t)?)?;
    Ok(SemigroupDelta {
        delta,
        ceiling: certificate.map(|c| c.ceiling(t)),
    })
}

fn search<T: Real, F>(
    t_grid: &[T],
    margin: T,
    kind: CertificateKind,
    mut coefficient: F,
) -> Result<Option<StabilityCertificate<T>>>
where
    F: FnMut(T) -> Result<DeltaResult<T>>,
{
    if t_grid.is_empty() {
        return Err(input("certificate grid must be nonempty"));
    }
    for &t0 in t_grid {
        if t0 <= T::zero() {
            return Err(input("certificate grid must be positive"));
        }
        let d = coefficient(t0)?;
        if d.value <= T::one() - margin {
            return Ok(Some(StabilityCertificate::new(t0, d.value, kind, d.mode)));
        }
    }
    Ok(None)
}

/// First grid point with `delta(T_t0) <= 1 - margin`, or `None`.
pub fn stability_certificate<T: Real>(sg: &Semigroup<T>, t_grid: &[T]) -> Result<Option<StabilityCertificate<T>>> {
    stability_certificate_with(sg, t_grid, lit(DEFAULT_MARGIN), &SamplerSettings::default())
}

pub fn stability_certificate_with<T: Real>(
    sg: &Semigroup<T>,
    t_grid: &[T],
    margin: T,
    settings: &SamplerSettings,
) -> Result<Option<StabilityCertificate<T>>> {
    search(t_grid, margin, CertificateKind::UniformAsymptotic, |t| {
        delta_with(&sg.evolve(t)?, settings)
    })
}

/// First grid point with `delta(A_t0) <= 1 - margin`, or `None`.
pub fn mean_ergodicity_certificate<T: Real>(
    sg: &Semigroup<T>,
    t_grid: &[T],
) -> Result<Option<StabilityCertificate<T>>> {
    mean_ergodicity_certificate_with(sg, t_grid, lit(DEFAULT_MARGIN), &SamplerSettings::default())
}

pub fn mean_ergodicity_certificate_with<T: Real>(
    sg: &Semigroup<T>,
    t_grid: &[T],
    margin: T,
    settings: &SamplerSettings,
) -> Result<Option<StabilityCertificate<T>>> {
    search(t_grid, margin, CertificateKind::UniformMeanErgodic, |t| {
        delta_with(&sg.cesaro_average(t)?, settings)
    })
}

/// Worst slack of each inequality over all ordered pairs; negative slack
/// means a violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomReport<T: Real> {
    pub pairs: usize,
    /// `min(delta, 1 - delta)`.
    pub range: T,
    /// `delta(T - S) - |delta(T) - delta(S)|`.
    pub lipschitz: T,
    /// `||T - S|| - delta(T - S)`.
    pub difference_norm: T,
    /// `delta(T) delta(S) - delta(T S)`.
    pub submultiplicative: T,
    /// `delta(T) ||H|| - ||T H||` for `H = S - T`.
    pub contraction: T,
    /// Largest entry error of `T - y0 f` over maps with `delta(T) <= tol`.
    pub rank_one_residual: Option<T>,
    pub passed: bool,
}

impl<T: Real> AxiomReport<T> {
    pub fn min_slack(&self) -> T {
        [self.range, self.lipschitz, self.difference_norm, self.submultiplicative, self.contraction]
            .into_iter()
            .fold(lit(f64::INFINITY), min_of)
    }
}

/// Checks the basic properties of `delta` on every ordered pair of `maps`.
pub fn check_delta_axioms<T: Real>(maps: &[LinearMap<T>], tol: T) -> Result<AxiomReport<T>> {
    let Some(first) = maps.first() else {
        return Err(input("need at least one map"));
    };
    let space = first.space();
    if maps.iter().any(|m| m.space() != space) {
        return Err(input("maps live on different spaces"));
    }
    if !space.is_exact() {
        return Err(Error::Precondition(format!("delta is not exact on {}", space.kind())));
    }
    let settings = SamplerSettings::default();
    let d = |m: &DMatrix<T>| delta_of_matrix(space, m, &settings).map(|e| e.value);
    let opnorm = |m: &DMatrix<T>| operator_norm_with(space, m, &settings).map(|e| e.value);

    let deltas: Vec<T> = maps.iter().map(|m| d(m.matrix())).collect::<Result<_>>()?;
    let inf: T = lit(f64::INFINITY);
    let mut report = AxiomReport {
        pairs: 0,
        range: inf,
        lipschitz: inf,
        difference_norm: inf,
        submultiplicative: inf,
        contraction: inf,
        rank_one_residual: None,
        passed: true,
    };
    for &dt in &deltas {
        report.range = min_of(report.range, min_of(dt, T::one() - dt));
    }
    for (i, t) in maps.iter().enumerate() {
        for (j, s) in maps.iter().enumerate() {
            let (tm, sm) = (t.matrix(), s.matrix());
            let diff = tm - sm;
            let d_diff = d(&diff)?;
            report.lipschitz = min_of(report.lipschitz, d_diff - (deltas[i] - deltas[j]).abs());
            // Direct-sum differences that are not block-diagonal report
            // an unsupported shape here.
            report.difference_norm = min_of(report.difference_norm, opnorm(&diff)? - d_diff);
            report.submultiplicative = min_of(report.submultiplicative, deltas[i] * deltas[j] - d(&(tm * sm))?);
            let h = sm - tm;
            report.contraction = min_of(report.contraction, deltas[i] * opnorm(&h)? - opnorm(&(tm * &h))?);
            report.pairs += 1;
        }
    }
    let f_row = space.functional_row();
    for (m, &dm) in maps.iter().zip(&deltas) {
        if dm <= tol {
            // T = y0 f with y0 = T u for any u in the base.
            let y0 = m.matrix() * space.reference_state();
            let rank_one = &y0 * f_row.transpose();
            let residual = crate::linalg::max_abs(&(m.matrix() - rank_one));
            report.rank_one_residual = Some(max_of(report.rank_one_residual.unwrap_or(T::zero()), residual));
        }
    }
    report.passed = report.min_slack() >= -tol && report.rank_one_residual.is_none_or(|r| r <= tol.sqrt());
    Ok(report)
}
