use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phystime::scenario::{
    all_bundled, bundled, bundled_names, emit_plotdata, parse_config, run_suites, AuditReport, ScenarioConfig, Suite,
};
use phystime::Error;

/// Audits of the extended-phase-space time observable.
#[derive(Parser)]
#[command(name = "phystime", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Original vs extended classical flow, bracket table, convergence.
    ClassicalEquivalence(Common),
    /// Factorised evolution and uncertainty products.
    QuantumEquivalence(Common),
    /// Physical subspace by spectral matching and by the dense kernel.
    ConstraintSolve(Common),
    /// POVM axioms and the distance from a projector-valued measure.
    PovmAudit(Common),
    /// Time distributions, conditional dynamics and event probabilities.
    TimeDistribution(Common),
    /// Clock-marginal shifts under extended evolution.
    Covariance(Common),
    /// Every suite of the scenario, or of all bundled scenarios.
    All(Common),
    /// Print the names of the bundled scenarios.
    List,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Name of a bundled scenario.
    #[arg(long)]
    scenario: Option<String>,
    /// Directory for JSON reports and CSV plot data.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

fn load(common: &Common, suite: Option<Suite>) -> Result<Vec<ScenarioConfig>, Error> {
    let mut configs = match (&common.config, &common.scenario) {
        (Some(path), _) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
            vec![parse_config(&text)?]
        }
        (None, Some(name)) => vec![bundled(name)?],
        (None, None) => all_bundled()?.into_iter().filter(|cfg| suite.is_none_or(|s| cfg.supports(s))).collect(),
    };
    if let Some(seed) = common.seed {
        for cfg in &mut configs {
            cfg.seed = seed;
        }
    }
    Ok(configs)
}

fn write_reports(reports: &[AuditReport], common: &Common, configs: &[ScenarioConfig]) -> Result<(), Error> {
    for (report, cfg) in reports.iter().zip(configs) {
        let dir = common.out.clone().or_else(|| cfg.output.dir.as_ref().map(PathBuf::from));
        if let Some(dir) = dir {
            emit_plotdata(report, &dir)?;
            let path = dir.join(format!("{}.json", report.scenario));
            let text = phystime::serial::to_json(report)?;
            std::fs::write(&path, text + "\n")
                .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
        }
    }
    Ok(())
}

fn print(reports: &[AuditReport], format: Format) -> Result<(), Error> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io = |e: std::io::Error| Error::Io { path: "<stdout>".into(), source: e };
    match format {
        Format::Json => {
            let text = match reports {
                [one] => phystime::serial::to_json(one)?,
                many => phystime::serial::to_json(&many)?,
            };
            writeln!(out, "{text}").map_err(io)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let csv_err = |e: csv::Error| Error::Io { path: "<stdout>".into(), source: e.into() };
            w.write_record(["scenario", "check", "measured", "threshold", "comparison", "passed", "expected_failure"])
                .map_err(csv_err)?;
            for r in reports {
                for c in &r.checks {
                    let cmp = serde_json::to_value(c.comparison)
                        .map_err(|e| Error::Io { path: "<stdout>".into(), source: e.into() })?;
                    w.write_record([
                        r.scenario.clone(),
                        c.id.clone(),
                        format!("{:.16e}", c.measured),
                        format!("{:.16e}", c.threshold),
                        cmp.as_str().unwrap_or_default().to_string(),
                        c.passed.to_string(),
                        c.expected_failure.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            w.flush().map_err(io)?;
        }
    }
    Ok(())
}

fn summarize(report: &AuditReport) {
    if report.passed {
        eprintln!("PASS {} ({} checks)", report.scenario, report.checks.len());
    } else {
        let failed: Vec<&str> = report.failures().map(|c| c.id.as_str()).collect();
        eprintln!(
            "FAIL {} ({} of {} checks): {}",
            report.scenario,
            failed.len(),
            report.checks.len(),
            failed.join(", ")
        );
    }
}

fn execute(common: &Common, suite: Option<Suite>) -> Result<bool, Error> {
    let configs = load(common, suite)?;
    let mut reports = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let suites = match suite {
            Some(s) => vec![s],
            None => cfg.suites.clone(),
        };
        let report = run_suites(cfg, &suites)?;
        summarize(&report);
        reports.push(report);
    }
    write_reports(&reports, common, &configs)?;
    print(&reports, common.format)?;
    Ok(reports.iter().all(|r| r.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, suite) = match &cli.command {
        Command::ClassicalEquivalence(c) => (c, Some(Suite::ClassicalEquivalence)),
        Command::QuantumEquivalence(c) => (c, Some(Suite::QuantumEquivalence)),
        Command::ConstraintSolve(c) => (c, Some(Suite::ConstraintSolve)),
        Command::PovmAudit(c) => (c, Some(Suite::PovmAudit)),
        Command::TimeDistribution(c) => (c, Some(Suite::TimeDistribution)),
        Command::Covariance(c) => (c, Some(Suite::Covariance)),
        Command::All(c) => (c, None),
        Command::List => {
            for name in bundled_names() {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
    };
    match execute(common, suite) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
