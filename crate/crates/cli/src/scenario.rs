//! Scenario files: a single JSON document describing a space, one or two
//! generators, start points, grids, weights and the bounds to verify.
//!
//! Reals may be given as JSON numbers or as decimal strings.

use std::fmt;
use std::path::{Path, PathBuf};

use dobrushin::{combine, BoundKind, Combine, GeometricTail, InnerNorm, LinearMap, Role, Semigroup, SpaceKind, StateSpace, Weight};
use nalgebra::{DMatrix, DVector};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::CliError;

/// A real read from either a JSON number or a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                v.trim()
                    .parse::<f64>()
                    .map(Num)
                    .map_err(|_| E::custom(format!("'{v}' is not a decimal number")))
            }
        }
        d.deserialize_any(V)
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Classical { n: usize },
    DirectSum { inner_dim: usize, inner_norm: InnerNorm },
    Quantum { d: usize },
}

impl SpaceSpec {
    pub fn kind(&self) -> SpaceKind {
        match *self {
            SpaceSpec::Classical { n } => SpaceKind::Classical { n },
            SpaceSpec::DirectSum { inner_dim, inner_norm } => SpaceKind::DirectSum { inner_dim, inner_norm },
            SpaceSpec::Quantum { d } => SpaceKind::Quantum { d },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant { c: Num },
    Power { alpha: Num },
    PowerLog { beta: Num, gamma: Num },
    Exponential { rate: Num },
    /// Either inline `samples` or a two-column `(s, b)` CSV file, resolved
    /// relative to the scenario file.
    Tabulated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<Vec<(Num, Num)>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<PathBuf>,
    },
    Scaled { lambda: Num, inner: Box<WeightSpec> },
    Sum { left: Box<WeightSpec>, right: Box<WeightSpec> },
    Product { left: Box<WeightSpec>, right: Box<WeightSpec> },
}

impl WeightSpec {
    pub fn build(&self, base_dir: &Path) -> Result<Weight<f64>, CliError> {
        let w = match self {
            WeightSpec::Constant { c } => Weight::constant(c.0)?,
            WeightSpec::Power { alpha } => Weight::power(alpha.0)?,
            WeightSpec::PowerLog { beta, gamma } => Weight::power_log(beta.0, gamma.0)?,
            WeightSpec::Exponential { rate } => Weight::exponential(rate.0)?,
            WeightSpec::Tabulated { samples, csv } => {
                let samples = match (samples, csv) {
                    (Some(s), None) => s.iter().map(|(a, b)| (a.0, b.0)).collect(),
                    (None, Some(path)) => read_weight_csv(&base_dir.join(path))?,
                    _ => {
                        return Err(CliError::Invalid(
                            "tabulated weight needs exactly one of 'samples' or 'csv'".into(),
                        ))
                    }
                };
                Weight::tabulated(samples)?
            }
            WeightSpec::Scaled { lambda, inner } => combine(Combine::Scale(lambda.0), &[inner.build(base_dir)?])?,
            WeightSpec::Sum { left, right } => {
                combine(Combine::Sum, &[left.build(base_dir)?, right.build(base_dir)?])?
            }
            WeightSpec::Product { left, right } => {
                combine(Combine::Product, &[left.build(base_dir)?, right.build(base_dir)?])?
            }
        };
        Ok(w)
    }

    /// Parses an inline JSON spec, or the contents of a file at that path.
    pub fn parse(text: &str) -> Result<(Self, PathBuf), CliError> {
        let path = Path::new(text);
        if path.is_file() {
            let body = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let spec = serde_json::from_str(&body).map_err(|e| CliError::parse(path, e))?;
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((spec, dir))
        } else {
            let spec = serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("weight spec: {e}")))?;
            Ok((spec, PathBuf::from(".")))
        }
    }
}

fn read_weight_csv(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let field = |i: usize| -> Result<f64, CliError> {
            record
                .get(i)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| CliError::Invalid(format!("{}: row {}: expected two numbers", path.display(), line + 1)))
        };
        // Tolerate a header row.
        if line == 0 && record.get(0).is_some_and(|v| v.parse::<f64>().is_err()) {
            continue;
        }
        out.push((field(0)?, field(1)?));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Slack allowed in bound rows and decay envelopes.
    #[serde(default = "default_bound_tol")]
    pub bound: Num,
    /// Tolerance for generator and Markov validation.
    #[serde(default = "default_validation_tol")]
    pub validation: Num,
    /// Threshold on the final weighted-convergence deviation.
    #[serde(default = "default_convergence")]
    pub convergence: Num,
    /// Tolerance of the numerical class-W test.
    #[serde(default = "default_class_tol")]
    pub class_w: Num,
}

fn default_bound_tol() -> Num {
    Num(1e-9)
}

fn default_validation_tol() -> Num {
    Num(1e-9)
}

fn default_convergence() -> Num {
    Num(dobrushin::weights::DEFAULT_CONVERGENCE_THRESHOLD)
}

fn default_class_tol() -> Num {
    Num(dobrushin::weights::DEFAULT_CLASS_TOL)
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            bound: default_bound_tol(),
            validation: default_validation_tol(),
            convergence: default_convergence(),
            class_w: default_class_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub space: SpaceSpec,
    /// Row-major, in the real coordinates of the space.
    pub generator: Vec<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed_generator: Option<Vec<Vec<Num>>>,
    /// `x` and optionally `z`; `z` defaults to `x`.
    pub start_points: Vec<Vec<Num>>,
    pub t_grid: Vec<Num>,
    pub certificate_grid: Vec<Num>,
    #[serde(default)]
    pub weights: Vec<WeightSpec>,
    #[serde(default)]
    pub bounds: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Exponent used in the geometric tail of the Cesàro bounds.
    #[serde(default)]
    pub geometric_tail: GeometricTail,
}

/// A scenario with every field checked and converted.
pub struct Prepared {
    pub scenario: Scenario,
    pub space: StateSpace<f64>,
    pub sg_t: Semigroup<f64>,
    pub sg_s: Semigroup<f64>,
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub t_grid: Vec<f64>,
    pub certificate_grid: Vec<f64>,
    pub weights: Vec<Weight<f64>>,
    pub bounds: Vec<BoundKind>,
}

fn matrix(field: &str, rows: &[Vec<Num>], dim: usize) -> Result<DMatrix<f64>, CliError> {
    if rows.len() != dim {
        return Err(CliError::Invalid(format!("{field}: expected {dim} rows, found {}", rows.len())));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != dim {
            return Err(CliError::Invalid(format!(
                "{field}[{i}]: expected {dim} entries, found {}",
                r.len()
            )));
        }
        if let Some(j) = r.iter().position(|v| !v.0.is_finite()) {
            return Err(CliError::Invalid(format!("{field}[{i}][{j}]: not finite")));
        }
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j].0))
}

fn grid(field: &str, values: &[Num], positive: bool) -> Result<Vec<f64>, CliError> {
    if values.is_empty() {
        return Err(CliError::Invalid(format!("{field}: must be nonempty")));
    }
    let v: Vec<f64> = values.iter().map(|n| n.0).collect();
    if let Some(i) = v.iter().position(|t| !t.is_finite() || *t < 0.0 || (positive && *t == 0.0)) {
        let what = if positive { "positive" } else { "nonnegative" };
        return Err(CliError::Invalid(format!("{field}[{i}]: must be finite and {what}")));
    }
    if let Some(i) = v.windows(2).position(|w| w[0] > w[1]) {
        return Err(CliError::Invalid(format!("{field}[{}]: grid must be sorted ascending", i + 1)));
    }
    Ok(v)
}

fn semigroup(field: &str, space: &StateSpace<f64>, q: DMatrix<f64>, tol: f64) -> Result<Semigroup<f64>, CliError> {
    let map = LinearMap::new(space.clone(), q, Role::Generator)?;
    Semigroup::with_tolerance(map, tol).map_err(|e| CliError::Invalid(format!("{field}: {e}")))
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let body = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&body).map_err(|e| CliError::parse(path, e))
    }

    /// Checks dimensions, grids and identifiers and validates the generators.
    pub fn prepare(self, base_dir: &Path) -> Result<Prepared, CliError> {
        let space = StateSpace::new(self.space.kind())?;
        let dim = space.ambient_dim();
        let tol = self.tolerances.validation.0;
        if !(tol >= 0.0) {
            return Err(CliError::Invalid("tolerances.validation: must be nonnegative".into()));
        }
        let sg_t = semigroup("generator", &space, matrix("generator", &self.generator, dim)?, tol)?;
        let sg_s = match &self.perturbed_generator {
            Some(rows) => semigroup(
                "perturbed_generator",
                &space,
                matrix("perturbed_generator", rows, dim)?,
                tol,
            )?,
            None => sg_t.clone(),
        };
        if self.start_points.is_empty() || self.start_points.len() > 2 {
            return Err(CliError::Invalid("start_points: give one or two points".into()));
        }
        let mut points = Vec::new();
        for (i, p) in self.start_points.iter().enumerate() {
            if p.len() != dim {
                return Err(CliError::Invalid(format!(
                    "start_points[{i}]: expected {dim} coordinates, found {}",
                    p.len()
                )));
            }
            let v = DVector::from_iterator(dim, p.iter().map(|n| n.0));
            if !space.is_in_base(&v, 1e-9)? {
                return Err(CliError::Invalid(format!("start_points[{i}]: not in the base")));
            }
            points.push(v);
        }
        let x = points[0].clone();
        let z = points.get(1).cloned().unwrap_or_else(|| x.clone());
        let t_grid = grid("t_grid", &self.t_grid, false)?;
        let certificate_grid = grid("certificate_grid", &self.certificate_grid, true)?;
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| w.build(base_dir).map_err(|e| CliError::Invalid(format!("weights[{i}]: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let bounds = self
            .bounds
            .iter()
            .enumerate()
            .map(|(i, b)| b.parse::<BoundKind>().map_err(|e| CliError::Invalid(format!("bounds[{i}]: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        for (name, v) in [
            ("bound", self.tolerances.bound.0),
            ("convergence", self.tolerances.convergence.0),
            ("class_w", self.tolerances.class_w.0),
        ] {
            if !(v >= 0.0) {
                return Err(CliError::Invalid(format!("tolerances.{name}: must be nonnegative")));
            }
        }
        Ok(Prepared {
            scenario: self,
            space,
            sg_t,
            sg_s,
            x,
            z,
            t_grid,
            certificate_grid,
            weights,
            bounds,
        })
    }
}

impl Prepared {
    pub fn tolerances_bound(&self) -> f64 {
        self.scenario.tolerances.bound.0
    }
}
