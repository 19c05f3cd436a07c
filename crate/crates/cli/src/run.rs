//! The analysis pipeline: validate, certificates, coefficient tables,
//! bound verifications, weight analyses.

use std::io::Write;
use std::path::Path;

use dobrushin::weights::{default_shift_samples, default_t_sequence};
use dobrushin::{
    delta_with, is_in_class_w, mean_ergodicity_certificate_with, operator_norm_with, stability_certificate_with,
    verify_bound, verify_weighted_convergence, BoundKind, ClassVerdict, EstimateMode, Error,
    QuadSettings, SamplerSettings, Semigroup, StabilityCertificate, StationaryPoints, ValidationReport,
    VerifySettings,
};
use nalgebra::DVector;
use serde::Serialize;

use crate::report::{write_report, Format};
use crate::scenario::{Prepared, Scenario};
use crate::{CliError, EXIT_INVALID, EXIT_PASS, EXIT_VIOLATION};

/// Command-line overrides of scenario fields.
#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSection {
    pub target: String,
    pub passed: bool,
    pub worst_violation: f64,
    pub summary: String,
    pub certified_at_probes: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationarySection {
    pub target: String,
    /// `unique`, `non_unique` or `none`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nullity: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSection {
    /// `found` or `not_found`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<EstimateMode>,
}

impl CertificateSection {
    fn from(cert: Option<&StabilityCertificate<f64>>) -> Self {
        match cert {
            Some(c) => Self {
                status: "found".into(),
                t0: Some(c.t0),
                rho: Some(c.rho),
                envelope_c: Some(c.envelope_c),
                envelope_alpha: Some(c.envelope_alpha),
                mode: Some(c.mode),
            },
            None => Self {
                status: "not_found".into(),
                t0: None,
                rho: None,
                envelope_c: None,
                envelope_alpha: None,
                mode: None,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificates {
    pub stability: CertificateSection,
    pub mean_ergodicity: CertificateSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRow {
    pub t: f64,
    pub delta_tt: f64,
    /// `delta(A_t)`; absent at `t = 0`.
    pub delta_at: Option<f64>,
    /// `rho^floor(t / t0)` from the stability certificate.
    pub ceiling: Option<f64>,
    /// `t0 / (t (1 - rho))` from the mean-ergodicity certificate.
    pub mean_decay: Option<f64>,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub t: f64,
    pub delta_tt: f64,
    pub envelope: f64,
    /// `||T_t - T_x0||`.
    pub deviation: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecaySection {
    /// `computed` or `not_applicable`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub rows: Vec<DecayRow>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundRowOut {
    pub t: f64,
    pub actual: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundSection {
    pub kind: BoundKind,
    /// `passed`, `failed` or `not_applicable`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_op: Option<f64>,
    pub notes: Vec<String>,
    pub rows: Vec<BoundRowOut>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatioRowOut {
    pub s: f64,
    pub t: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceRowOut {
    pub t: f64,
    pub deviation: f64,
    pub quadrature_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSection {
    /// `passed`, `failed` or `not_applicable`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub rows: Vec<ConvergenceRowOut>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightSection {
    pub index: usize,
    pub verdict: ClassVerdict,
    pub analytic: bool,
    pub evidence: String,
    pub ratio_table: Vec<RatioRowOut>,
    /// Known `lim r(s, t)` per shift.
    pub limits: Vec<(f64, f64)>,
    pub convergence: ConvergenceSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub exit_code: i32,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub version: String,
    pub seed: u64,
    pub tolerance: f64,
    pub scenario: Scenario,
    pub validation: Vec<ValidationSection>,
    pub stationary: Vec<StationarySection>,
    pub certificates: Certificates,
    pub delta_table: Vec<DeltaRow>,
    pub decay: DecaySection,
    pub bounds: Vec<BoundSection>,
    pub weights: Vec<WeightSection>,
    pub verdict: Verdict,
}

fn validation_section(target: &str, v: &ValidationReport<f64>) -> ValidationSection {
    ValidationSection {
        target: target.into(),
        passed: v.passed,
        worst_violation: v.worst_violation(),
        summary: v.summary(),
        certified_at_probes: v.certified_at_probes.clone(),
    }
}

fn stationary_section(target: &str, sg: &Semigroup<f64>, tol: f64) -> StationarySection {
    let (status, x0, nullity) = match sg.stationary_points(tol) {
        StationaryPoints::Unique { x0 } => ("unique", Some(x0.iter().copied().collect()), None),
        StationaryPoints::NonUnique { nullity } => ("non_unique", None, Some(nullity)),
        StationaryPoints::None => ("none", None, None),
    };
    StationarySection {
        target: target.into(),
        status: status.into(),
        x0,
        nullity,
    }
}

fn unique_x0(sg: &Semigroup<f64>, tol: f64) -> Option<DVector<f64>> {
    match sg.stationary_points(tol) {
        StationaryPoints::Unique { x0 } => Some(x0),
        _ => None,
    }
}

/// Rows of `delta(T_t)`, the envelope `C e^(-alpha t)` and `||T_t - T_x0||`
/// on `t_grid`, written as CSV to `out`.
pub fn emit_decay_table<W: Write>(
    sg: &Semigroup<f64>,
    certificate: &StabilityCertificate<f64>,
    t_grid: &[f64],
    sampler: &SamplerSettings,
    tol: f64,
    out: W,
) -> Result<Vec<DecayRow>, CliError> {
    let x0 = unique_x0(sg, 1e-9)
        .ok_or_else(|| CliError::Core(Error::Precondition("no unique stationary point".into())))?;
    let rows = decay_rows(sg, certificate, &x0, t_grid, sampler, tol)?;
    write_decay_csv(&rows, out)?;
    Ok(rows)
}

pub(crate) fn write_decay_csv<W: Write>(rows: &[DecayRow], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Invalid(format!("writing decay table: {e}"));
    w.write_record(["t", "delta_Tt", "envelope", "deviation"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.t, r.delta_tt, r.envelope, r.deviation].map(|v| v.to_string()))
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Invalid(format!("writing decay table: {e}")))?;
    Ok(())
}

fn decay_rows(
    sg: &Semigroup<f64>,
    cert: &StabilityCertificate<f64>,
    x0: &DVector<f64>,
    t_grid: &[f64],
    sampler: &SamplerSettings,
    tol: f64,
) -> Result<Vec<DecayRow>, CliError> {
    let space = sg.space();
    let projector = x0 * space.functional_row().transpose();
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let tt = sg.evolve(t)?;
        let delta_tt = delta_with(&tt, sampler)?.value;
        let deviation = operator_norm_with(space, &(tt.matrix() - &projector), sampler)?.value;
        let envelope = cert.envelope(t);
        let slack = envelope - deviation;
        rows.push(DecayRow {
            t,
            delta_tt,
            envelope,
            deviation,
            slack,
            pass: slack >= -tol,
        });
    }
    Ok(rows)
}

fn fmt_row(kind: BoundKind, t: f64, actual: f64, bound: f64, slack: f64) -> String {
    format!("{kind} at t = {t}: actual {actual} exceeds bound {bound} (slack {slack:e})")
}

/// Runs every section of a prepared scenario.
pub fn analyze(prepared: &Prepared, options: Options) -> Result<Report, CliError> {
    let Prepared {
        scenario,
        space: _,
        sg_t,
        sg_s,
        x,
        z,
        t_grid,
        certificate_grid,
        weights,
        bounds,
    } = prepared;
    let tol = options.tol.unwrap_or(scenario.tolerances.bound.0);
    if !(tol >= 0.0) {
        return Err(CliError::Invalid("--tol: must be nonnegative".into()));
    }
    let seed = options.seed.unwrap_or(scenario.seed);
    let sampler = SamplerSettings {
        seed,
        ..SamplerSettings::default()
    };
    let stat_tol = 1e-9;
    let mut failures = Vec::new();

    let mut validation = vec![validation_section("generator", sg_t.validation())];
    let mut stationary = vec![stationary_section("generator", sg_t, stat_tol)];
    if scenario.perturbed_generator.is_some() {
        validation.push(validation_section("perturbed_generator", sg_s.validation()));
        stationary.push(stationary_section("perturbed_generator", sg_s, stat_tol));
    }

    let margin = dobrushin::dobrushin::DEFAULT_MARGIN;
    let stability = stability_certificate_with(sg_t, certificate_grid, margin, &sampler)?;
    let mean = mean_ergodicity_certificate_with(sg_t, certificate_grid, margin, &sampler)?;
    let certificates = Certificates {
        stability: CertificateSection::from(stability.as_ref()),
        mean_ergodicity: CertificateSection::from(mean.as_ref()),
    };

    let mut delta_table = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let d = delta_with(&sg_t.evolve(t)?, &sampler)?;
        let delta_at = if t > 0.0 {
            Some(delta_with(&sg_t.cesaro_average(t)?, &sampler)?.value)
        } else {
            None
        };
        delta_table.push(DeltaRow {
            t,
            delta_tt: d.value,
            delta_at,
            ceiling: stability.as_ref().map(|c| c.ceiling(t)),
            mean_decay: mean.as_ref().filter(|_| t > 0.0).map(|c| c.mean_decay(t)),
            exact: d.is_exact(),
        });
    }

    let decay = match (&stability, unique_x0(sg_t, stat_tol)) {
        (Some(cert), Some(x0)) => {
            let rows = decay_rows(sg_t, cert, &x0, t_grid, &sampler, tol)?;
            for r in rows.iter().filter(|r| r.t >= cert.t0 && !r.pass) {
                failures.push(format!(
                    "decay envelope at t = {}: deviation {} exceeds envelope {} (slack {:e})",
                    r.t, r.deviation, r.envelope, r.slack
                ));
            }
            DecaySection {
                status: "computed".into(),
                reason: None,
                rows,
            }
        }
        (None, _) => DecaySection {
            status: "not_applicable".into(),
            reason: Some("no stability certificate on the certificate grid".into()),
            rows: Vec::new(),
        },
        (Some(_), None) => DecaySection {
            status: "not_applicable".into(),
            reason: Some("no unique stationary point".into()),
            rows: Vec::new(),
        },
    };

    let settings = VerifySettings {
        tol,
        certificate_grid: certificate_grid.clone(),
        margin,
        sampler,
        tail: scenario.geometric_tail,
        ..VerifySettings::default()
    };
    let mut bound_sections = Vec::with_capacity(bounds.len());
    for &kind in bounds {
        let section = match verify_bound(kind, sg_t, sg_s, x, z, t_grid, &settings) {
            Ok(rep) => {
                for r in rep.rows.iter().filter(|r| !r.pass) {
                    failures.push(fmt_row(kind, r.t, r.actual, r.bound, r.slack));
                }
                BoundSection {
                    kind,
                    status: if rep.passed { "passed" } else { "failed" }.into(),
                    reason: None,
                    certificate: Some(CertificateSection::from(Some(&rep.certificate))),
                    norm_b: Some(rep.norm_b.value),
                    delta_op: rep.delta_op,
                    notes: rep.notes,
                    rows: rep
                        .rows
                        .iter()
                        .map(|r| BoundRowOut {
                            t: r.t,
                            actual: r.actual,
                            bound: r.bound,
                            slack: r.slack,
                            pass: r.pass,
                        })
                        .collect(),
                }
            }
            Err(e @ (Error::Precondition(_) | Error::HypothesisNotMet(_) | Error::OutOfDomain(_))) => BoundSection {
                kind,
                status: "not_applicable".into(),
                reason: Some(e.to_string()),
                certificate: None,
                norm_b: None,
                delta_op: None,
                notes: Vec::new(),
                rows: Vec::new(),
            },
            Err(e) => return Err(CliError::Invalid(format!("{kind}: {e}"))),
        };
        bound_sections.push(section);
    }

    let quad = QuadSettings::default();
    let conv_grid: Vec<f64> = t_grid.iter().copied().filter(|t| *t > 0.0).collect();
    let mut weight_sections = Vec::with_capacity(weights.len());
    for (index, b) in weights.iter().enumerate() {
        let class = is_in_class_w(
            b,
            &default_shift_samples(),
            &default_t_sequence(),
            scenario.tolerances.class_w.0,
        )?;
        let convergence = if conv_grid.is_empty() {
            ConvergenceSection {
                status: "not_applicable".into(),
                reason: Some("no positive times in t_grid".into()),
                rows: Vec::new(),
            }
        } else {
            match verify_weighted_convergence(sg_t, b, x, &conv_grid, &quad, scenario.tolerances.convergence.0) {
                Ok(c) => ConvergenceSection {
                    status: if c.passed { "passed" } else { "failed" }.into(),
                    reason: None,
                    rows: c
                        .rows
                        .iter()
                        .map(|r| ConvergenceRowOut {
                            t: r.t,
                            deviation: r.deviation,
                            quadrature_error: r.quadrature_error,
                        })
                        .collect(),
                },
                Err(e @ Error::Precondition(_)) => ConvergenceSection {
                    status: "not_applicable".into(),
                    reason: Some(e.to_string()),
                    rows: Vec::new(),
                },
                Err(e) => return Err(CliError::Invalid(format!("weights[{index}]: {e}"))),
            }
        };
        weight_sections.push(WeightSection {
            index,
            verdict: class.verdict,
            analytic: class.analytic,
            evidence: class.evidence,
            ratio_table: class
                .table
                .iter()
                .map(|r| RatioRowOut {
                    s: r.s,
                    t: r.t,
                    ratio: r.ratio,
                })
                .collect(),
            limits: class.limits,
            convergence,
        });
    }

    let exit_code = if failures.is_empty() { EXIT_PASS } else { EXIT_VIOLATION };
    Ok(Report {
        name: scenario.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        tolerance: tol,
        scenario: scenario.clone(),
        validation,
        stationary,
        certificates,
        delta_table,
        decay,
        bounds: bound_sections,
        weights: weight_sections,
        verdict: Verdict { exit_code, failures },
    })
}

/// Loads, analyzes and writes one scenario. Diagnostics go to stderr; the
/// return value is the process exit status.
pub fn run_scenario(path: &Path, out_dir: &Path, format: Format, options: Options) -> i32 {
    let result = Scenario::load(path)
        .and_then(|s| s.prepare(path.parent().unwrap_or(Path::new("."))))
        .and_then(|p| analyze(&p, options))
        .and_then(|r| write_report(&r, out_dir, format).map(|()| r));
    match result {
        Ok(report) => {
            for f in &report.verdict.failures {
                eprintln!("violation: {f}");
            }
            report.verdict.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}
