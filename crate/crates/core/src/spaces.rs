//! Finite-dimensional abstract state spaces and linear maps acting on them.
//!
//! Three realizations are supported, all sharing a real coordinate
//! representation so that every operator is a dense real matrix acting on
//! column vectors:
//!
//! * `Classical { n }`: `R^n` with the l1 norm, `f(x) = sum x_i`, cone `x >= 0`.
//! * `DirectSum { inner_dim, inner_norm }`: `R (+) R^k` with
//!   `||(a, v)|| = max(|a|, ||v||)`, `f(a, v) = a`, cone `||v|| <= a`.
//! * `Quantum { d }`: `d x d` Hermitian matrices in the basis of
//!   [`HermitianBasis`], trace norm, `f = trace`, cone of PSD matrices.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, input, Error, Result};
use crate::hermitian::{hermitian_eigen, hermitian_eigenvalues, trace_norm, CMatrix, HermitianBasis};
use crate::linalg::{expm, max_abs, norm_1, norm_2, norm_inf};
use crate::sampling::{self, SamplerSettings};
use crate::scalar::{from_usize, lit, max_of, to_f64, Real};

pub const DEFAULT_TOL: f64 = 1e-9;

const EXHAUSTIVE_SIGN_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerNorm {
    L1,
    L2,
    Linf,
}

impl InnerNorm {
    pub fn vector_norm<T: Real>(self, v: &[T]) -> T {
        match self {
            InnerNorm::L1 => v.iter().fold(T::zero(), |acc, x| acc + x.abs()),
            InnerNorm::L2 => v.iter().fold(T::zero(), |acc, x| acc + *x * *x).sqrt(),
            InnerNorm::Linf => v.iter().fold(T::zero(), |acc, x| max_of(acc, x.abs())),
        }
    }

    /// Operator norm of `m` induced by this vector norm.
    pub fn induced_norm<T: Real>(self, m: &DMatrix<T>) -> T {
        match self {
            InnerNorm::L1 => norm_1(m),
            InnerNorm::L2 => norm_2(m),
            InnerNorm::Linf => norm_inf(m),
        }
    }

    pub fn dual(self) -> InnerNorm {
        match self {
            InnerNorm::L1 => InnerNorm::Linf,
            InnerNorm::L2 => InnerNorm::L2,
            InnerNorm::Linf => InnerNorm::L1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Classical { n: usize },
    DirectSum { inner_dim: usize, inner_norm: InnerNorm },
    Quantum { d: usize },
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Classical { n } => write!(f, "Classical({n})"),
            SpaceKind::DirectSum { inner_dim, inner_norm } => {
                write!(f, "DirectSum({inner_dim}, {inner_norm:?})")
            }
            SpaceKind::Quantum { d } => write!(f, "Quantum({d})"),
        }
    }
}

/// A finite-dimensional abstract state space.
#[derive(Clone)]
pub struct StateSpace<T: Real> {
    kind: SpaceKind,
    basis: Option<Arc<HermitianBasis<T>>>,
}

impl<T: Real> fmt::Debug for StateSpace<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateSpace").field("kind", &self.kind).finish()
    }
}

impl<T: Real> PartialEq for StateSpace<T> {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// `x = xi * (u - v)` with `u`, `v` in the base.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSumDecomposition<T: Real> {
    pub xi: T,
    pub u: DVector<T>,
    pub v: DVector<T>,
}

/// Extreme points of the base used by sup-over-base computations.
#[derive(Debug, Clone)]
pub struct BaseSample<T: Real> {
    pub points: Vec<DVector<T>>,
    /// True when `points` contains every extreme point of the base.
    pub exhaustive: bool,
}

impl<T: Real> StateSpace<T> {
    pub fn new(kind: SpaceKind) -> Result<Self> {
        match kind {
            SpaceKind::Classical { n: 0 } => Err(input("classical space needs n >= 1")),
            SpaceKind::DirectSum { inner_dim: 0, .. } => {
                Err(input("direct sum needs inner_dim >= 1"))
            }
            SpaceKind::Quantum { d: 0 } => Err(input("quantum space needs d >= 1")),
            SpaceKind::Quantum { d } => Ok(Self {
                kind,
                basis: Some(Arc::new(HermitianBasis::new(d))),
            }),
            _ => Ok(Self { kind, basis: None }),
        }
    }

    pub fn classical(n: usize) -> Result<Self> {
        Self::new(SpaceKind::Classical { n })
    }

    pub fn direct_sum(inner_dim: usize, inner_norm: InnerNorm) -> Result<Self> {
        Self::new(SpaceKind::DirectSum {
            inner_dim,
            inner_norm,
        })
    }

    pub fn quantum(d: usize) -> Result<Self> {
        Self::new(SpaceKind::Quantum { d })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Classical { n } => n,
            SpaceKind::DirectSum { inner_dim, .. } => inner_dim + 1,
            SpaceKind::Quantum { d } => d * d,
        }
    }

    /// Decomposition constant of the cone. Every kind decomposes elements of
    /// `ker f` with constant 1; for `DirectSum` this is the constant on
    /// `ker f` only.
    pub fn lambda_generating(&self) -> T {
        T::one()
    }

    /// Exact δ and operator norms are available (no sampling).
    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, SpaceKind::Quantum { .. })
    }

    pub fn hermitian_basis(&self) -> Option<&HermitianBasis<T>> {
        self.basis.as_deref()
    }

    fn qbasis(&self) -> &HermitianBasis<T> {
        self.basis.as_deref().expect("quantum space carries a basis")
    }

    fn check(&self, x: &DVector<T>) -> Result<()> {
        check_dim(self.ambient_dim(), x.len())
    }

    pub fn norm(&self, x: &DVector<T>) -> Result<T> {
        self.check(x)?;
        Ok(self.norm_unchecked(x))
    }

    pub(crate) fn norm_unchecked(&self, x: &DVector<T>) -> T {
        match self.kind {
            SpaceKind::Classical { .. } => x.iter().fold(T::zero(), |acc, v| acc + v.abs()),
            SpaceKind::DirectSum { inner_norm, .. } => {
                max_of(x[0].abs(), inner_norm.vector_norm(&x.as_slice()[1..]))
            }
            SpaceKind::Quantum { .. } => trace_norm(&self.qbasis().matrix(x)),
        }
    }

    /// The strictly positive functional `f` defining the base.
    pub fn functional(&self, x: &DVector<T>) -> Result<T> {
        self.check(x)?;
        Ok(self.functional_row().dot(x))
    }

    /// Coefficients of `f` in coordinates.
    pub fn functional_row(&self) -> DVector<T> {
        let m = self.ambient_dim();
        match self.kind {
            SpaceKind::Classical { .. } => DVector::from_element(m, T::one()),
            SpaceKind::DirectSum { .. } => {
                let mut r = DVector::zeros(m);
                r[0] = T::one();
                r
            }
            SpaceKind::Quantum { d } => {
                let mut r = DVector::zeros(m);
                r[0] = from_usize::<T>(d).sqrt();
                r
            }
        }
    }

    pub fn is_positive(&self, x: &DVector<T>, tol: T) -> Result<bool> {
        self.check(x)?;
        Ok(self.cone_violation(x) <= tol)
    }

    /// Distance-like amount by which `x` fails to lie in the cone (0 inside).
    pub(crate) fn cone_violation(&self, x: &DVector<T>) -> T {
        match self.kind {
            SpaceKind::Classical { .. } => x.iter().fold(T::zero(), |acc, v| max_of(acc, -*v)),
            SpaceKind::DirectSum { inner_norm, .. } => {
                max_of(T::zero(), inner_norm.vector_norm(&x.as_slice()[1..]) - x[0])
            }
            SpaceKind::Quantum { .. } => {
                let eigs = hermitian_eigenvalues(&self.qbasis().matrix(x));
                max_of(T::zero(), -eigs[0])
            }
        }
    }

    pub fn is_in_base(&self, x: &DVector<T>, tol: T) -> Result<bool> {
        if tol < T::zero() {
            return Err(input("tolerance must be nonnegative"));
        }
        self.check(x)?;
        let f = self.functional_row().dot(x);
        Ok(self.cone_violation(x) <= tol && (f - T::one()).abs() <= tol)
    }

    /// A fixed interior point of the base (uniform / maximally mixed / apex).
    pub fn reference_state(&self) -> DVector<T> {
        let m = self.ambient_dim();
        match self.kind {
            SpaceKind::Classical { n } => DVector::from_element(m, T::one() / from_usize::<T>(n)),
            SpaceKind::DirectSum { .. } => {
                let mut x = DVector::zeros(m);
                x[0] = T::one();
                x
            }
            SpaceKind::Quantum { d } => {
                let mut x = DVector::zeros(m);
                x[0] = T::one() / from_usize::<T>(d).sqrt();
                x
            }
        }
    }

    /// Splits a zero-functional element into `xi * (u - v)` with `u`, `v` in
    /// the base and `xi = norm(x) / 2`.
    pub fn decompose_zero_sum(&self, x: &DVector<T>, tol: T) -> Result<ZeroSumDecomposition<T>> {
        self.check(x)?;
        let f = self.functional_row().dot(x);
        if f.abs() > tol {
            return Err(Error::Precondition(format!(
                "f(x) = {} is not zero within tolerance",
                to_f64(f)
            )));
        }
        let norm = self.norm_unchecked(x);
        if norm <= tol {
            return Err(Error::Degenerate("x is zero".into()));
        }
        let half: T = lit(0.5);
        match self.kind {
            SpaceKind::Classical { .. } => {
                let pos = x.map(|v| max_of(v, T::zero()));
                let neg = x.map(|v| max_of(-v, T::zero()));
                let (p, q) = (pos.sum(), neg.sum());
                Ok(ZeroSumDecomposition {
                    xi: half * (p + q),
                    u: pos / p,
                    v: neg / q,
                })
            }
            SpaceKind::DirectSum { inner_norm, .. } => {
                let inner = x.rows(1, x.len() - 1).into_owned();
                let r = inner_norm.vector_norm(inner.as_slice());
                let mut u = DVector::zeros(x.len());
                let mut v = DVector::zeros(x.len());
                u[0] = T::one();
                v[0] = T::one();
                u.rows_mut(1, inner.len()).copy_from(&(&inner / r));
                v.rows_mut(1, inner.len()).copy_from(&(-&inner / r));
                Ok(ZeroSumDecomposition { xi: half * r, u, v })
            }
            SpaceKind::Quantum { d } => {
                let basis = self.qbasis();
                let (vals, vecs) = hermitian_eigen(&basis.matrix(x));
                let zero = Complex::new(T::zero(), T::zero());
                let mut pos = CMatrix::from_element(d, d, zero);
                let mut neg = CMatrix::from_element(d, d, zero);
                let (mut p, mut q) = (T::zero(), T::zero());
                for (i, lam) in vals.iter().enumerate() {
                    let e = vecs.column(i);
                    let proj = e * e.adjoint();
                    if *lam > T::zero() {
                        pos += proj * Complex::new(*lam, T::zero());
                        p += *lam;
                    } else if *lam < T::zero() {
                        neg += proj * Complex::new(-*lam, T::zero());
                        q += -*lam;
                    }
                }
                Ok(ZeroSumDecomposition {
                    xi: half * (p + q),
                    u: basis.coordinates(&pos) / p,
                    v: basis.coordinates(&neg) / q,
                })
            }
        }
    }

    /// Extreme points of the base: exhaustive where finite and small,
    /// otherwise `settings.n_samples` seeded samples.
    pub fn base_extreme_points(&self, settings: &SamplerSettings) -> BaseSample<T> {
        let m = self.ambient_dim();
        match self.kind {
            SpaceKind::Classical { .. } => BaseSample {
                points: (0..m).map(|i| unit(m, i)).collect(),
                exhaustive: true,
            },
            SpaceKind::DirectSum { inner_dim, inner_norm } => {
                let apex = |v: DVector<T>| {
                    let mut x = DVector::zeros(m);
                    x[0] = T::one();
                    x.rows_mut(1, inner_dim).copy_from(&v);
                    x
                };
                match inner_norm {
                    InnerNorm::L1 => {
                        let mut points = Vec::with_capacity(2 * inner_dim);
                        for i in 0..inner_dim {
                            points.push(apex(unit(inner_dim, i)));
                            points.push(apex(-unit(inner_dim, i)));
                        }
                        BaseSample {
                            points,
                            exhaustive: true,
                        }
                    }
                    InnerNorm::Linf if inner_dim <= EXHAUSTIVE_SIGN_LIMIT => BaseSample {
                        points: (0..(1usize << inner_dim))
                            .map(|mask| {
                                apex(DVector::from_fn(inner_dim, |i, _| {
                                    if mask >> i & 1 == 1 {
                                        -T::one()
                                    } else {
                                        T::one()
                                    }
                                }))
                            })
                            .collect(),
                        exhaustive: true,
                    },
                    InnerNorm::Linf => {
                        let mut rng = sampling::rng(settings.seed);
                        let points = (0..settings.n_samples)
                            .map(|_| {
                                let g = sampling::unit_sphere::<T, _>(&mut rng, inner_dim);
                                apex(g.map(|v| if v < T::zero() { -T::one() } else { T::one() }))
                            })
                            .collect();
                        BaseSample {
                            points,
                            exhaustive: false,
                        }
                    }
                    InnerNorm::L2 => {
                        let mut rng = sampling::rng(settings.seed);
                        let points = (0..settings.n_samples)
                            .map(|_| apex(sampling::unit_sphere(&mut rng, inner_dim)))
                            .collect();
                        BaseSample {
                            points,
                            exhaustive: false,
                        }
                    }
                }
            }
            SpaceKind::Quantum { d } => {
                let basis = self.qbasis();
                let mut rng = sampling::rng(settings.seed);
                let points = (0..settings.n_samples)
                    .map(|_| basis.pure_state(&sampling::pure_state(&mut rng, d)))
                    .collect();
                BaseSample {
                    points,
                    exhaustive: false,
                }
            }
        }
    }
}

pub(crate) fn unit<T: Real>(n: usize, i: usize) -> DVector<T> {
    let mut e = DVector::zeros(n);
    e[i] = T::one();
    e
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Markov,
    Generator,
    General,
}

/// Dense matrix representation of an operator on a [`StateSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap<T: Real> {
    space: StateSpace<T>,
    matrix: DMatrix<T>,
    role: Role,
}

impl<T: Real> LinearMap<T> {
    pub fn new(space: StateSpace<T>, matrix: DMatrix<T>, role: Role) -> Result<Self> {
        let m = space.ambient_dim();
        if matrix.nrows() != matrix.ncols() {
            return Err(input(format!(
                "operator matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_dim(m, matrix.nrows())?;
        Ok(Self { space, matrix, role })
    }

    pub fn identity(space: StateSpace<T>) -> Self {
        let m = space.ambient_dim();
        Self {
            space,
            matrix: DMatrix::identity(m, m),
            role: Role::Markov,
        }
    }

    /// Builds the real representation of a Hermiticity-preserving
    /// superoperator on `Quantum(d)`.
    pub fn from_superoperator<F>(space: StateSpace<T>, role: Role, op: F) -> Result<Self>
    where
        F: Fn(&CMatrix<T>) -> CMatrix<T>,
    {
        let basis = space
            .hermitian_basis()
            .ok_or_else(|| input("superoperators need a quantum space"))?
            .clone();
        let m = basis.len();
        let mut matrix = DMatrix::zeros(m, m);
        for j in 0..m {
            let image = basis.coordinates(&op(basis.element(j)));
            matrix.set_column(j, &image);
        }
        Self::new(space, matrix, role)
    }

    /// Quantum channel `rho -> sum_k K_k rho K_k^*`.
    pub fn from_kraus(space: StateSpace<T>, kraus: &[CMatrix<T>]) -> Result<Self> {
        Self::from_superoperator(space, Role::Markov, |x| {
            let zero = Complex::new(T::zero(), T::zero());
            let mut out = CMatrix::from_element(x.nrows(), x.ncols(), zero);
            for k in kraus {
                out += k * x * k.adjoint();
            }
            out
        })
    }

    pub fn space(&self) -> &StateSpace<T> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn apply(&self, x: &DVector<T>) -> Result<DVector<T>> {
        check_dim(self.matrix.ncols(), x.len())?;
        Ok(&self.matrix * x)
    }

    /// `self ∘ other`; the product of Markov maps stays Markov.
    pub fn compose(&self, other: &LinearMap<T>) -> Result<LinearMap<T>> {
        self.same_space(other)?;
        let role = if self.role == Role::Markov && other.role == Role::Markov {
            Role::Markov
        } else {
            Role::General
        };
        Ok(LinearMap {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
            role,
        })
    }

    pub fn difference(&self, other: &LinearMap<T>) -> Result<LinearMap<T>> {
        self.same_space(other)?;
        Ok(LinearMap {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
            role: Role::General,
        })
    }

    fn same_space(&self, other: &LinearMap<T>) -> Result<()> {
        if self.space != other.space {
            return Err(input(format!(
                "maps act on different spaces: {} vs {}",
                self.space.kind(),
                other.space.kind()
            )));
        }
        Ok(())
    }

    /// Choi matrix `sum_{jk} E_jk (x) Phi(E_jk)` of a quantum map.
    pub fn choi_matrix(&self) -> Option<CMatrix<T>> {
        let basis = self.space.hermitian_basis()?;
        let d = basis.d();
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let mut choi = CMatrix::from_element(d * d, d * d, zero);
        for j in 0..d {
            for k in 0..d {
                let mut e = CMatrix::from_element(d, d, zero);
                e[(j, k)] = one;
                let coords = basis.complex_coordinates(&e);
                let mut image = CMatrix::from_element(d, d, zero);
                for l in 0..basis.len() {
                    let mut c = zero;
                    for (i, ci) in coords.iter().enumerate() {
                        c += *ci * Complex::new(self.matrix[(l, i)], T::zero());
                    }
                    image += basis.element(l) * c;
                }
                choi.view_mut((j * d, k * d), (d, d)).copy_from(&image);
            }
        }
        Some(choi)
    }
}

/// One named check inside a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCheck<T: Real> {
    pub name: String,
    pub violation: T,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<T: Real> {
    pub passed: bool,
    pub checks: Vec<ValidationCheck<T>>,
    /// Probe times at which Markovianity of `exp(tau Q)` was certified
    /// empirically; empty when the structural test was exact.
    pub certified_at_probes: Vec<T>,
}

impl<T: Real> ValidationReport<T> {
    fn from_checks(checks: Vec<ValidationCheck<T>>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.passed),
            checks,
            certified_at_probes: Vec::new(),
        }
    }

    pub fn worst_violation(&self) -> T {
        self.checks
            .iter()
            .map(|c| c.violation)
            .fold(T::zero(), max_of)
    }

    pub fn summary(&self) -> String {
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} (violation {:e})", c.name, to_f64(c.violation)))
            .collect();
        if failed.is_empty() {
            "pass".to_string()
        } else {
            format!("fail: {}", failed.join("; "))
        }
    }
}

fn check<T: Real>(name: impl Into<String>, violation: T, tol: T) -> ValidationCheck<T> {
    ValidationCheck {
        name: name.into(),
        violation,
        passed: violation <= tol,
    }
}

/// Checks positivity on a generating set of the cone and preservation of `f`.
pub fn validate_markov<T: Real>(map: &LinearMap<T>, tol: T) -> ValidationReport<T> {
    let m = map.matrix();
    let space = map.space();
    let f_row = space.functional_row();
    let f_violation = (m.transpose() * &f_row - &f_row).amax();

    let positivity = match space.kind() {
        SpaceKind::Classical { .. } => {
            let worst = m.iter().fold(T::zero(), |acc, v| max_of(acc, -*v));
            check("nonnegative entries", worst, tol)
        }
        SpaceKind::Quantum { .. } => {
            let choi = map.choi_matrix().expect("quantum map has a Choi matrix");
            let min_eig = hermitian_eigenvalues(&choi)[0];
            check("Choi matrix positive semidefinite", max_of(T::zero(), -min_eig), tol)
        }
        SpaceKind::DirectSum { inner_dim, inner_norm } => {
            direct_sum_positivity(space, m, inner_dim, inner_norm, tol)
        }
    };
    let name = match space.kind() {
        SpaceKind::Classical { .. } => "columns sum to one",
        SpaceKind::Quantum { .. } => "trace preserving",
        SpaceKind::DirectSum { .. } => "first coordinate preserved",
    };
    ValidationReport::from_checks(vec![positivity, check(name, f_violation, tol)])
}

fn direct_sum_positivity<T: Real>(
    space: &StateSpace<T>,
    m: &DMatrix<T>,
    inner_dim: usize,
    inner_norm: InnerNorm,
    tol: T,
) -> ValidationCheck<T> {
    let tail_col = m.view((1, 0), (inner_dim, 1));
    let tail_row = m.view((0, 1), (1, inner_dim));
    let block_form = tail_col.iter().all(|v| *v == T::zero()) && tail_row.iter().all(|v| *v == T::zero());
    if inner_norm == InnerNorm::L2 && block_form {
        let inner = m.view((1, 1), (inner_dim, inner_dim)).into_owned();
        let excess = norm_2(&inner) - m[(0, 0)];
        return check("cone preserved (spectral norm)", max_of(T::zero(), excess), tol);
    }
    let sample = space.base_extreme_points(&SamplerSettings::default());
    let worst = sample
        .points
        .iter()
        .map(|p| space.cone_violation(&(m * p)))
        .fold(T::zero(), max_of);
    let name = if sample.exhaustive {
        "cone preserved (extreme points)"
    } else {
        "cone preserved (sampled extreme points)"
    };
    check(name, worst, tol)
}

/// Q-matrix test for classical generators; for the other kinds `f ∘ Q = 0`
/// plus Markovianity of `exp(tau Q)` at each probe time.
pub fn validate_generator<T: Real>(
    map: &LinearMap<T>,
    tol: T,
    probe_times: &[T],
) -> Result<ValidationReport<T>> {
    if probe_times.is_empty() || probe_times.iter().any(|t| *t <= T::zero()) {
        return Err(input("probe times must be nonempty and positive"));
    }
    let q = map.matrix();
    let space = map.space();
    let f_row = space.functional_row();
    let f_violation = (q.transpose() * &f_row).amax();

    if let SpaceKind::Classical { n } = space.kind() {
        let mut worst_off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst_off = max_of(worst_off, -q[(i, j)]);
                }
            }
        }
        return Ok(ValidationReport::from_checks(vec![
            check("nonnegative off-diagonal rates", worst_off, tol),
            check("columns sum to zero", f_violation, tol),
        ]));
    }

    let mut checks = vec![check("f ∘ Q = 0", f_violation, tol)];
    for tau in probe_times {
        let label = to_f64(*tau);
        match expm(&(q * *tau)) {
            Ok(e) => {
                let probe = LinearMap {
                    space: space.clone(),
                    matrix: e,
                    role: Role::Markov,
                };
                for c in validate_markov(&probe, tol).checks {
                    checks.push(ValidationCheck {
                        name: format!("exp({label}·Q): {}", c.name),
                        ..c
                    });
                }
            }
            Err(err) => checks.push(ValidationCheck {
                name: format!("exp({label}·Q): {err}"),
                violation: lit(f64::INFINITY),
                passed: false,
            }),
        }
    }
    let mut report = ValidationReport::from_checks(checks);
    report.certified_at_probes = probe_times.to_vec();
    Ok(report)
}

/// Lifts a contraction `M` on `(R^k, inner_norm)` to the Markov map
/// `(a, v) -> (a, M v)` on `R (+) R^k`.
pub fn lift_contraction<T: Real>(
    inner_norm: InnerNorm,
    m: &DMatrix<T>,
    tol: T,
) -> Result<LinearMap<T>> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(input("contraction must be a nonempty square matrix"));
    }
    let norm = inner_norm.induced_norm(m);
    if norm > T::one() + tol {
        return Err(Error::NotAContraction { norm: to_f64(norm) });
    }
    let k = m.nrows();
    let space = StateSpace::direct_sum(k, inner_norm)?;
    LinearMap::new(space, block_lift(m, T::one()), Role::Markov)
}

/// Block matrix `diag(corner, inner)`.
pub fn block_lift<T: Real>(inner: &DMatrix<T>, corner: T) -> DMatrix<T> {
    let k = inner.nrows();
    let mut out = DMatrix::zeros(k + 1, k + 1);
    out[(0, 0)] = corner;
    out.view_mut((1, 1), (k, k)).copy_from(inner);
    out
}

/// How a reported value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateMode {
    Exact,
    SampledLowerBound { n_samples: usize, seed: u64 },
}

/// A value together with the way it was computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T: Real> {
    pub value: T,
    pub mode: EstimateMode,
}

impl<T: Real> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Self {
            value,
            mode: EstimateMode::Exact,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.mode == EstimateMode::Exact
    }
}

/// Block structure `(a, v) -> (a' a, M v)` of a direct-sum operator, if any.
pub(crate) fn direct_sum_blocks<T: Real>(m: &DMatrix<T>) -> Option<(T, DMatrix<T>)> {
    let k = m.nrows() - 1;
    let scale = max_of(T::one(), max_abs(m));
    let eps = scale * lit(1e-13);
    let off_block = m.view((1, 0), (k, 1)).iter().chain(m.view((0, 1), (1, k)).iter()).all(|v| v.abs() <= eps);
    off_block.then(|| (m[(0, 0)], m.view((1, 1), (k, k)).into_owned()))
}

/// Operator norm induced by the base norm, with default sampler settings for
/// the quantum case.
pub fn operator_norm<T: Real>(space: &StateSpace<T>, matrix: &DMatrix<T>) -> Result<Estimate<T>> {
    operator_norm_with(space, matrix, &SamplerSettings::default())
}

pub fn operator_norm_with<T: Real>(
    space: &StateSpace<T>,
    matrix: &DMatrix<T>,
    settings: &SamplerSettings,
) -> Result<Estimate<T>> {
    if matrix.nrows() != matrix.ncols() {
        return Err(input(format!(
            "operator matrix must be square, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    check_dim(space.ambient_dim(), matrix.nrows())?;
    match space.kind() {
        SpaceKind::Classical { .. } => Ok(Estimate::exact(norm_1(matrix))),
        SpaceKind::DirectSum { inner_norm, .. } => {
            let (corner, inner) = direct_sum_blocks(matrix).ok_or_else(|| {
                Error::UnsupportedShape("direct-sum operator norm needs block-diagonal form".into())
            })?;
            Ok(Estimate::exact(max_of(corner.abs(), inner_norm.induced_norm(&inner))))
        }
        SpaceKind::Quantum { d } => {
            let basis = space.qbasis();
            let score = |psi: &DVector<Complex<T>>| trace_norm(&basis.matrix(&(matrix * basis.pure_state(psi))));
            let value = sampled_sup(d, settings, |a, _| score(a));
            Ok(Estimate {
                value,
                mode: EstimateMode::SampledLowerBound {
                    n_samples: settings.n_samples,
                    seed: settings.seed,
                },
            })
        }
    }
}

/// Seeded maximization of `score` over pairs of pure states in `C^d`.
///
/// Pairs are drawn sequentially; each pair that sets a new running maximum
/// is refined by coordinate ascent. Because the draws for `n` samples are a
/// prefix of those for `n' > n`, the returned value is nondecreasing in
/// `n_samples` for a fixed seed.
pub(crate) fn sampled_sup<T: Real, F>(d: usize, settings: &SamplerSettings, score: F) -> T
where
    F: Fn(&DVector<Complex<T>>, &DVector<Complex<T>>) -> T,
{
    let structured = sampling::structured_states::<T>(d);
    let mut best = T::zero();
    let mut start = None;
    let mut running = lit::<T>(f64::NEG_INFINITY);
    for (i, a) in structured.iter().enumerate() {
        for b in &structured[i + 1..] {
            let s = score(a, b);
            if s > running {
                running = s;
                start = Some((a.clone(), b.clone()));
            }
        }
    }
    if let Some((a, b)) = start {
        let (refined, _, _) = sampling::refine_pair(a, b, settings.refine_steps, &score);
        best = max_of(running, refined);
    }
    let mut rng = sampling::rng(settings.seed);
    let mut running = lit::<T>(f64::NEG_INFINITY);
    for _ in 0..settings.n_samples.max(1) {
        let a = sampling::pure_state::<T, _>(&mut rng, d);
        let b = sampling::pure_state::<T, _>(&mut rng, d);
        let s = score(&a, &b);
        if s > running {
            running = s;
            let (refined, _, _) = sampling::refine_pair(a, b, settings.refine_steps, &score);
            best = max_of(best, refined);
        }
    }
    best
}
