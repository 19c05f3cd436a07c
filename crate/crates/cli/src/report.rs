//! Report files: `report.json` and fixed-header CSV tables.

use std::fs;
use std::path::Path;

use crate::run::{write_decay_csv, Report};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

fn csv_file<const N: usize>(
    path: &Path,
    header: [&str; N],
    rows: impl IntoIterator<Item = [String; N]>,
) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Invalid(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the report into `out_dir`, creating it if needed.
///
/// `json` writes `report.json`; `csv` writes `bounds.csv`, `delta.csv`,
/// `decay.csv` and `weights.csv`.
pub fn write_report(report: &Report, out_dir: &Path, format: Format) -> Result<(), CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    if matches!(format, Format::Json | Format::Both) {
        let path = out_dir.join("report.json");
        let mut body = serde_json::to_string_pretty(report)
            .map_err(|e| CliError::Invalid(format!("serializing report: {e}")))?;
        body.push('\n');
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
    }
    if matches!(format, Format::Csv | Format::Both) {
        csv_file(
            &out_dir.join("bounds.csv"),
            ["kind", "t", "actual", "bound", "slack", "pass"],
            report.bounds.iter().flat_map(|b| {
                b.rows.iter().map(move |r| {
                    [
                        b.kind.to_string(),
                        r.t.to_string(),
                        r.actual.to_string(),
                        r.bound.to_string(),
                        r.slack.to_string(),
                        r.pass.to_string(),
                    ]
                })
            }),
        )?;
        csv_file(
            &out_dir.join("delta.csv"),
            ["t", "delta_Tt", "delta_At", "ceiling", "mean_decay"],
            report.delta_table.iter().map(|r| {
                [
                    r.t.to_string(),
                    r.delta_tt.to_string(),
                    opt(r.delta_at),
                    opt(r.ceiling),
                    opt(r.mean_decay),
                ]
            }),
        )?;
        let path = out_dir.join("decay.csv");
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        write_decay_csv(&report.decay.rows, file)?;
        csv_file(
            &out_dir.join("weights.csv"),
            ["weight", "s", "t", "ratio"],
            report.weights.iter().flat_map(|w| {
                w.ratio_table
                    .iter()
                    .map(move |r| [w.index.to_string(), r.s.to_string(), r.t.to_string(), r.ratio.to_string()])
            }),
        )?;
    }
    Ok(())
}
