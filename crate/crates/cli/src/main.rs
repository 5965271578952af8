//! `msqhr`: Morris-Shore decomposition, coupled-mirror propagators, pulse
//! design and numerical cross-checks from a JSON configuration.
//!
//! Exit codes: 0 success, 1 failed check or I/O error, 2 configuration
//! error, 3 model not applicable, 4 integration failure, 5 no solution.

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use commands::{Model, Output, Settings};
use config::RunConfig;

#[derive(Debug, Clone, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model not applicable: {0}")]
    Inapplicable(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("{0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Internal(_) => 1,
            CliError::Config(_) => 2,
            CliError::Inapplicable(_) => 3,
            CliError::Integration(_) => 4,
            CliError::NoSolution(_) => 5,
        }
    }
}

impl From<msqhr::Error> for CliError {
    fn from(e: msqhr::Error) -> Self {
        use msqhr::Error as E;
        match e {
            E::Validation(_) | E::NonHermitian { .. } | E::DimensionMismatch { .. } | E::Domain(_) => {
                CliError::Config(e.to_string())
            }
            E::UnsupportedMode(m) => CliError::Inapplicable(m),
            E::IntegrationFailure { .. } => CliError::Integration(e.to_string()),
            E::NoSolution(m) => CliError::NoSolution(m),
            E::Consistency(_) => CliError::Internal(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "msqhr",
    version,
    about = "Morris-Shore reduction and coupled quantum Householder reflections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write results here instead of stdout. For `simulate` this receives the
    /// trajectory CSV and the summary goes to stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Integrator tolerance, within [1e-12, 1e-4].
    #[arg(long, global = true, default_value_t = 1e-10, value_name = "X")]
    rel_tol: f64,

    /// Trajectory samples, endpoints included.
    #[arg(long, global = true, default_value_t = 401, value_name = "N")]
    samples: usize,

    /// Analytic model; picked from the configuration when omitted.
    #[arg(long, global = true, value_enum, value_name = "NAME")]
    model: Option<Model>,

    /// Tolerance for the reflection condition (`propagate`) or for the
    /// analytic-numeric agreement (`verify`).
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,

    /// JSON array of configurations (objects or paths) run independently.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "config")]
    sweep: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// MS couplings and bright, dark and upper states.
    Decompose,
    /// Analytic propagator and its Householder factors.
    Propagate,
    /// Integrate the Schrödinger equation; writes a population table.
    Simulate,
    /// Pulse parameters for target reflection phases.
    Design,
    /// Compare the analytic propagator with direct integration.
    Verify,
}

fn run_one(command: Command, cfg: &RunConfig, s: &Settings) -> Result<Output, CliError> {
    match command {
        Command::Decompose => commands::decompose_cmd(cfg),
        Command::Propagate => commands::propagate_cmd(cfg, s),
        Command::Simulate => commands::simulate_cmd(cfg, s),
        Command::Design => commands::design_cmd(cfg, s),
        Command::Verify => commands::verify_cmd(cfg, s),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SweepEntry {
    Path(PathBuf),
    Config(Box<RunConfig>),
}

fn load_sweep(path: &Path) -> Result<Vec<Result<RunConfig, CliError>>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let entries: Vec<SweepEntry> = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: expected an array of configurations: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(entries
        .into_iter()
        .map(|e| match e {
            SweepEntry::Config(cfg) => Ok(*cfg),
            SweepEntry::Path(p) => config::load(&base.join(p)),
        })
        .collect())
}

fn write(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let settings = Settings {
        rel_tol: cli.rel_tol,
        samples: cli.samples,
        model: cli.model,
        tol: cli.tol,
    };

    if let Some(sweep) = &cli.sweep {
        if cli.command == Command::Simulate {
            return Err(CliError::Config("--sweep does not support simulate".into()));
        }
        let configs = load_sweep(sweep)?;
        let results = msqhr::parallel::map(&configs, msqhr::parallel::Execution::default(), |cfg| {
            cfg.as_ref()
                .map_err(CliError::clone)
                .and_then(|c| run_one(cli.command, c, &settings))
        });
        let mut code = 0;
        let report: Vec<Value> = results
            .into_iter()
            .enumerate()
            .map(|(index, r)| match r {
                Ok(out) => {
                    let c = if out.failed_check.is_some() { 1 } else { 0 };
                    if code == 0 {
                        code = c;
                    }
                    json!({ "index": index, "exit_code": c, "result": out.json })
                }
                Err(e) => {
                    if code == 0 {
                        code = e.exit_code();
                    }
                    json!({ "index": index, "exit_code": e.exit_code(), "error": e.to_string() })
                }
            })
            .collect();
        write(cli.out.as_deref(), &pretty(&Value::Array(report)))?;
        return Ok(code);
    }

    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let cfg = config::load(path)?;
    let out = run_one(cli.command, &cfg, &settings)?;
    match &out.csv {
        Some(csv) => {
            write(cli.out.as_deref(), csv)?;
            let summary = pretty(&out.json);
            if cli.out.is_some() {
                print!("{summary}");
            } else {
                eprint!("{summary}");
            }
        }
        None => write(cli.out.as_deref(), &pretty(&out.json))?,
    }
    match out.failed_check {
        Some(msg) => {
            eprintln!("check failed: {msg}");
            Ok(1)
        }
        None => Ok(0),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        let cases = [
            (msqhr::Error::Validation("x".into()), 2),
            (msqhr::Error::UnsupportedMode("x".into()), 3),
            (
                msqhr::Error::IntegrationFailure {
                    time: 0.0,
                    step: 1e-300,
                },
                4,
            ),
            (msqhr::Error::NoSolution("x".into()), 5),
            (msqhr::Error::Consistency("x".into()), 1),
        ];
        for (e, code) in cases {
            assert_eq!(CliError::from(e).exit_code(), code);
        }
    }

    #[test]
    fn flags_parse_after_the_subcommand() {
        let cli = Cli::try_parse_from([
            "msqhr",
            "propagate",
            "--config",
            "c.json",
            "--model",
            "far_off",
            "--tol",
            "0.1",
        ])
        .unwrap();
        assert_eq!(cli.command, Command::Propagate);
        assert_eq!(cli.model, Some(Model::FarOff));
        assert!(Cli::try_parse_from(["msqhr", "decompose", "--config", "a", "--sweep", "b"]).is_err());
    }
}
