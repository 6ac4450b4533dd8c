use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ism::output::{fmt_f64, write_csv, Row, BIFURCATION_HEADER};
use ism::{parse_config, run_scenario, verify_summary, CliError};
use ism_core::meanfield::bifurcation_scan;
use ism_core::monokinetic::{expansion_check, log_log_slope, ExpansionKind};

#[derive(Parser)]
#[command(name = "ism", version, about = "Inertial spin flocking model: simulations and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its outputs.
    Run {
        config: PathBuf,
        /// Output directory, overriding `[output] directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the mean-field order parameter over evenly spaced beta*J.
    ScanBifurcation {
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        steps: usize,
        /// Write bifurcation.csv here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a zero-range integral with its small-scale expansion.
    CheckExpansion {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Comma-separated kernel scales.
        #[arg(long, value_delimiter = ',', required = true)]
        eps_list: Vec<f64>,
    },
    /// Re-check a finished run from its summary.json and CSV files.
    Verify { summary: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Space,
    Line,
    LineRank,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match ism::configure_threads().and_then(|()| dispatch(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ism: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Run { config, out } => {
            let text = fs::read_to_string(&config).map_err(|e| CliError::io(&config, e))?;
            let parsed = parse_config(&text).map_err(CliError::Config)?;
            let dir = out.unwrap_or_else(|| PathBuf::from(&parsed.output.directory));
            let report = run_scenario(&parsed, &dir)?;
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if let Some(verdict) = report.summary["verdict"].as_str() {
                println!("verdict: {verdict}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ScanBifurcation { min, max, steps, out } => {
            let rows = bifurcation_scan(min, max, steps).map_err(CliError::setup)?;
            let rows = rows.iter().map(|s| Row::new().real(s.beta_j).real(s.xi).real(s.gamma));
            match out {
                Some(path) => write_csv(&path, &BIFURCATION_HEADER, rows)?,
                None => {
                    let mut text = BIFURCATION_HEADER.join(",");
                    text.push('\n');
                    for r in rows {
                        text.push_str(&r.join());
                        text.push('\n');
                    }
                    std::io::stdout()
                        .write_all(text.as_bytes())
                        .map_err(|e| CliError::io("<stdout>", e))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckExpansion { kind, eps_list } => {
            let kind = match kind {
                Kind::Space => ExpansionKind::Space,
                Kind::Line => ExpansionKind::Line,
                Kind::LineRank => ExpansionKind::LineRank,
            };
            if eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                return Err(CliError::Config(vec![ism::ConfigError::global("every eps must be positive")]));
            }
            println!("eps,exact,asymptotic,rel_error");
            let mut errors = Vec::new();
            for &eps in &eps_list {
                let r = expansion_check(kind, eps).map_err(CliError::numerical)?;
                println!("{},{},{},{}", fmt_f64(r.eps), fmt_f64(r.exact), fmt_f64(r.asymptotic), fmt_f64(r.rel_error));
                errors.push(r.rel_error);
            }
            if eps_list.len() >= 2 {
                match log_log_slope(&eps_list, &errors) {
                    Ok(slope) => eprintln!("log-log slope of rel_error against eps: {slope:.4}"),
                    Err(e) => eprintln!("no slope: {e}"),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { summary } => {
            let report = verify_summary(&summary)?;
            for c in &report.checks {
                println!("{c}");
            }
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Err(CliError::Verification(format!(
                    "{} of {} checks failed",
                    report.checks.iter().filter(|c| !c.ok).count(),
                    report.checks.len()
                )))
            }
        }
    }
}
