use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dobrushin::weights::{default_shift_samples, default_t_sequence, DEFAULT_CLASS_TOL};
use dobrushin::{is_in_class_w, StationaryPoints};
use dobrushin_cli::{run_scenario, Format, Options, Scenario, WeightSpec, EXIT_INVALID, EXIT_PASS};

#[derive(Parser)]
#[command(name = "dobrushin", version, about = "Dobrushin coefficients and perturbation bounds for Markov semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every section of a scenario and write the report.
    Analyze {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        format: Format,
        /// Overrides the scenario's bound tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Overrides the scenario's sampling seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse the scenario and validate its generators.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Class-W test of a weight given as inline JSON or a file path.
    Weights {
        #[arg(long)]
        check: String,
    },
}

fn validate(path: &Path) -> i32 {
    let prepared = Scenario::load(path).and_then(|s| s.prepare(path.parent().unwrap_or(Path::new("."))));
    match prepared {
        Ok(p) => {
            println!("generator: {}", p.sg_t.validation().summary());
            if p.scenario.perturbed_generator.is_some() {
                println!("perturbed_generator: {}", p.sg_s.validation().summary());
            }
            let stationary = match p.sg_t.stationary_points(1e-9) {
                StationaryPoints::Unique { .. } => "unique".to_string(),
                StationaryPoints::NonUnique { nullity } => format!("non-unique (nullity {nullity})"),
                StationaryPoints::None => "none".to_string(),
            };
            println!("stationary point: {stationary}");
            EXIT_PASS
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

fn weights(check: &str) -> i32 {
    let result = WeightSpec::parse(check).and_then(|(spec, dir)| {
        let w = spec.build(&dir)?;
        Ok(is_in_class_w(&w, &default_shift_samples(), &default_t_sequence(), DEFAULT_CLASS_TOL)?)
    });
    match result {
        Ok(report) => {
            let kind = if report.analytic { "analytic" } else { "numerical" };
            println!("verdict: {:?} ({kind}): {}", report.verdict, report.evidence);
            println!("s,t,ratio");
            for r in &report.table {
                println!("{},{},{}", r.s, r.t, r.ratio);
            }
            for (s, lim) in &report.limits {
                println!("limit at s = {s}: {lim}");
            }
            EXIT_PASS
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Analyze {
            scenario,
            out,
            format,
            tol,
            seed,
        } => run_scenario(&scenario, &out, format, Options { tol, seed }),
        Command::Validate { scenario } => validate(&scenario),
        Command::Weights { check } => weights(&check),
    };
    ExitCode::from(code as u8)
}
