use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use dobrushin::BoundKind;
use dobrushin_cli::{analyze, emit_decay_table, run_scenario, Format, Options, Scenario};

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn bundled() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

fn report_for(name: &str) -> dobrushin_cli::Report {
    let path = scenarios_dir().join(name);
    let prepared = Scenario::load(&path).unwrap().prepare(&scenarios_dir()).unwrap();
    analyze(&prepared, Options::default()).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dobrushin"))
}

#[test]
fn stationary_gap_example() {
    let r = report_for("two_state_perturbation.json");
    assert_eq!(r.verdict.exit_code, 0);
    let eq6 = r.bounds.iter().find(|b| b.kind == BoundKind::Eq6).unwrap();
    assert_eq!(eq6.rows.len(), 1);
    assert!((eq6.rows[0].actual - 0.1).abs() < 1e-9);
    // 0.2 / (1 - e^-2)
    let expected = 0.2 / (1.0 - (-2.0f64).exp());
    assert!((eq6.rows[0].bound - expected).abs() < 1e-9);
    assert!((eq6.rows[0].bound - 0.2313).abs() < 1e-4);
    let per62 = r.bounds.iter().find(|b| b.kind == BoundKind::Per62).unwrap();
    assert_eq!(per62.status, "passed");
}

#[test]
fn zero_generator_has_no_certificate_and_passes() {
    let r = report_for("zero_generator.json");
    assert_eq!(r.certificates.stability.status, "not_found");
    assert_eq!(r.bounds[0].status, "not_applicable");
    assert_eq!(r.verdict.exit_code, 0);
}

#[test]
fn dephasing_is_not_certified() {
    let r = report_for("quantum_dephasing.json");
    assert_eq!(r.certificates.stability.status, "not_found");
    assert_eq!(r.stationary[0].status, "non_unique");
}

#[test]
fn decay_table_example() {
    // Two-state Q with t0 = 0.5 and rho = e^-1: at t = 1 the envelope is 2e^-1.
    let path = scenarios_dir().join("two_state_decay.json");
    let p = Scenario::load(&path).unwrap().prepare(&scenarios_dir()).unwrap();
    let cert = dobrushin::stability_certificate(&p.sg_t, &[0.5]).unwrap().unwrap();
    assert!((cert.rho - (-1.0f64).exp()).abs() < 1e-12);
    let mut buf = Vec::new();
    let rows = emit_decay_table(&p.sg_t, &cert, &[0.5, 1.0, 50.0], &Default::default(), 1e-9, &mut buf).unwrap();
    assert!((rows[0].envelope - 2.0).abs() < 1e-12);
    assert!((rows[1].envelope - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
    assert!((rows[1].envelope - 0.7357589).abs() < 1e-7);
    assert!((rows[1].delta_tt - (-2.0f64).exp()).abs() < 1e-12);
    assert!(rows.iter().all(|r| r.pass && r.slack >= -1e-9));
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,delta_Tt,envelope,deviation\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn every_bound_id_is_exercised() {
    let mut seen = Vec::new();
    for path in bundled() {
        let s = Scenario::load(&path).unwrap();
        seen.extend(s.bounds.iter().map(|b| b.parse::<BoundKind>().unwrap()));
    }
    for kind in BoundKind::ALL {
        assert!(seen.contains(&kind), "{kind} not in any bundled scenario");
    }
}

#[test]
fn bundled_scenarios_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for path in bundled() {
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        let code = run_scenario(&path, &dir.path().join(&name), Format::Both, Options::default());
        let expected = if name == "invalid_generator" { 2 } else { 0 };
        assert_eq!(code, expected, "{name}");
    }
}

#[test]
fn csv_headers() {
    let dir = tempfile::tempdir().unwrap();
    let code = run_scenario(
        &scenarios_dir().join("two_state_perturbation.json"),
        dir.path(),
        Format::Csv,
        Options::default(),
    );
    assert_eq!(code, 0);
    assert!(!dir.path().join("report.json").exists());
    let bounds = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert!(bounds.starts_with("kind,t,actual,bound,slack,pass\n"));
    assert!(bounds.contains("\neq6,1,"));
    let delta = fs::read_to_string(dir.path().join("delta.csv")).unwrap();
    assert!(delta.starts_with("t,delta_Tt,delta_At,ceiling,mean_decay\n"));
}

#[test]
fn tolerance_override() {
    let path = scenarios_dir().join("two_state_perturbation.json");
    let p = Scenario::load(&path).unwrap().prepare(&scenarios_dir()).unwrap();
    assert!(analyze(&p, Options { tol: Some(-1.0), seed: None }).is_err());
    let r = analyze(&p, Options { tol: Some(0.0), seed: None }).unwrap();
    assert_eq!(r.tolerance, 0.0);
    assert_eq!(r.verdict.exit_code, 0);
}

#[test]
fn failing_bound_exits_one() {
    // The reduced Cesàro exponent undershoots just above t0.
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("cesaro.json");
    fs::write(
        &scenario,
        r#"{
            "space": {"kind": "classical", "n": 2},
            "generator": [[-1, 1], [1, -1]],
            "start_points": [[1, 0]],
            "t_grid": ["1.01"],
            "certificate_grid": [1],
            "bounds": ["cesaro_convergence"]
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(run_scenario(&scenario, &out, Format::Json, Options::default()), 1);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let row = &report["bounds"][0]["rows"][0];
    assert_eq!(row["pass"], false);
    assert!(row["actual"].as_f64().unwrap() > 0.4);
    assert!(!report["verdict"]["failures"].as_array().unwrap().is_empty());

    fs::write(
        &scenario,
        fs::read_to_string(&scenario).unwrap().replace("\"bounds\"", "\"geometric_tail\": \"full\", \"bounds\""),
    )
    .unwrap();
    assert_eq!(run_scenario(&scenario, &out, Format::Json, Options::default()), 0);
}

#[test]
fn invalid_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax", "{ \"space\": "),
        (
            "dimension",
            r#"{"space": {"kind": "classical", "n": 3}, "generator": [[-1, 1], [1, -1]],
                "start_points": [[1, 0]], "t_grid": [1], "certificate_grid": [1]}"#,
        ),
        (
            "unknown bound",
            r#"{"space": {"kind": "classical", "n": 2}, "generator": [[-1, 1], [1, -1]],
                "start_points": [[1, 0]], "t_grid": [1], "certificate_grid": [1], "bounds": ["eq99"]}"#,
        ),
        (
            "unsorted grid",
            r#"{"space": {"kind": "classical", "n": 2}, "generator": [[-1, 1], [1, -1]],
                "start_points": [[1, 0]], "t_grid": [2, 1], "certificate_grid": [1]}"#,
        ),
        (
            "not in base",
            r#"{"space": {"kind": "classical", "n": 2}, "generator": [[-1, 1], [1, -1]],
                "start_points": [[2, 0]], "t_grid": [1], "certificate_grid": [1]}"#,
        ),
    ];
    for (label, body) in cases {
        let path = dir.path().join("s.json");
        fs::write(&path, body).unwrap();
        let out = bin()
            .args(["analyze", "--scenario"])
            .arg(&path)
            .arg("--out")
            .arg(dir.path().join("out"))
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(2), "{label}");
        assert!(!out.stderr.is_empty(), "{label}");
    }
    let out = bin()
        .args(["analyze", "--scenario", "/nonexistent/s.json", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    fs::write(&path, "{\n  \"space\": {\"kind\": \"classical\", \"n\": 2},\n  \"generator\": [[-1, \"x\"]]\n}").unwrap();
    let out = bin().args(["validate", "--scenario"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn validate_command() {
    let out = bin()
        .args(["validate", "--scenario"])
        .arg(scenarios_dir().join("cyclic_three_state.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("generator: pass"));
    assert!(text.contains("stationary point: unique"));
    let out = bin()
        .args(["validate", "--scenario"])
        .arg(scenarios_dir().join("invalid_generator.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn weights_command() {
    let out = bin()
        .args(["weights", "--check", r#"{"form": "exponential", "rate": 1}"#])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("verdict: NotInW (analytic)"));
    assert!(text.contains("limit at s = 1: 0.632"));
    let out = bin()
        .args(["weights", "--check", r#"{"form": "power", "alpha": -2}"#])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["analyze", "--format", "json", "--seed", "5", "--scenario"])
        .arg(scenarios_dir().join("two_state_perturbation.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
}
