//! `ftb` — transport bounds on joint distributions under marginal and
//! dependence uncertainty, on finitely supported instances.
//!
//! Exit codes: 0 success, 2 input error, 3 dimension/feature error,
//! 4 empty class.

mod commands;
mod instance;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Deserialize;

use ftb_core::numeric::Scalar;

use instance::InstanceFile;
use report::RunReport;

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn input(message: String) -> Self {
        Self { message, code: 2 }
    }
    pub fn feature(message: String) -> Self {
        Self { message, code: 3 }
    }
    pub fn empty_class(message: String) -> Self {
        Self { message, code: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassFlag {
    #[value(alias = "q")]
    Exact,
    #[value(alias = "q0")]
    Order0,
    #[value(alias = "q1")]
    Order1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Primal,
    Dual,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "ftb",
    version,
    about = "Bounds on joint-distribution functionals under marginal and dependence uncertainty"
)]
struct Cli {
    /// Exact rational arithmetic instead of floating point
    #[arg(long, global = true)]
    exact: bool,
    /// Absolute tolerance for float-mode checks
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Report format
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Optional JSON config file supplying defaults; flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report (or generated instance) here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classical, improved, and sharp envelope values at query points
    Bounds {
        #[arg(long)]
        instance: PathBuf,
        /// Query point `x1,...,xd`; repeat for a batch
        #[arg(long, required = true)]
        point: Vec<String>,
        #[arg(long, value_enum)]
        class: Option<ClassFlag>,
    },
    /// Transport value of the instance payoff with plan and hedge certificates
    Price {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        class: ClassFlag,
        #[arg(long, value_enum, default_value = "both")]
        side: Side,
    },
    /// Box-indicator value and, in dimension 2, the hedge decomposition
    HedgeBox {
        #[arg(long)]
        instance: PathBuf,
        /// Box corner `b1,...,bd`
        #[arg(long)]
        corner: String,
        /// Require the decomposition (error outside dimension 2)
        #[arg(long)]
        decompose: bool,
        /// Report the value only
        #[arg(long)]
        value_only: bool,
    },
    /// The bundled instance separating the improved envelope from the class maximum
    Counterexample,
    /// Class-emptiness check with witness or arbitrage certificate
    Arbitrage {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Seeded random feasible instance
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        dim: usize,
        /// Atoms per axis (at most 12)
        #[arg(long)]
        grid: usize,
        #[arg(long, default_value = "2")]
        constraints: usize,
    },
}

#[derive(Debug, Default, Deserialize)]
struct ConfigFile {
    #[serde(default)]
    exact: Option<bool>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    format: Option<String>,
}

struct Settings {
    exact: bool,
    tol: f64,
    format: OutputFormat,
    out: Option<PathBuf>,
}

fn resolve_settings(cli: &Cli) -> Result<Settings, CliError> {
    let config: ConfigFile = match &cli.config {
        None => ConfigFile::default(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("config {}: {e}", path.display())))?
        }
    };
    let format = match (&cli.format, config.format.as_deref()) {
        (Some(f), _) => *f,
        (None, Some("csv")) => OutputFormat::Csv,
        (None, Some("json")) | (None, None) => OutputFormat::Json,
        (None, Some(other)) => {
            return Err(CliError::input(format!("config: unknown format {other:?}")))
        }
    };
    let tol = cli.tol.or(config.tol).unwrap_or(1e-9);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(CliError::input(format!("tolerance must be a nonnegative float, got {tol}")));
    }
    Ok(Settings {
        exact: cli.exact || config.exact.unwrap_or(false),
        tol,
        format,
        out: cli.out.clone(),
    })
}

fn read_instance(path: &PathBuf) -> Result<InstanceFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("instance {}: {e}", path.display())))?;
    InstanceFile::from_json(&text)
}

fn run_command<T: Scalar>(cli: &Cli, settings: &Settings) -> Result<RunReport, CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match &cli.command {
        Command::Bounds { instance, point, class } => {
            let inst = read_instance(instance)?.load::<T>()?;
            commands::cmd_bounds(&inst, point, *class, args)
        }
        Command::Price { instance, class, side } => {
            let inst = read_instance(instance)?.load::<T>()?;
            let tol = if T::EXACT {
                T::default_tol()
            } else {
                T::parse_number(&settings.tol.to_string())
                    .map_err(|e| CliError::input(e.to_string()))?
            };
            commands::cmd_price(&inst, *class, *side, &tol, args)
        }
        Command::HedgeBox { instance, corner, decompose, value_only } => {
            let inst = read_instance(instance)?.load::<T>()?;
            commands::cmd_hedge_box(&inst, corner, *decompose, *value_only, args)
        }
        Command::Counterexample => commands::cmd_counterexample::<T>(args),
        Command::Arbitrage { instance } => {
            let inst = read_instance(instance)?.load::<T>()?;
            commands::cmd_arbitrage(&inst, args)
        }
        Command::Gen { .. } => unreachable!("gen is handled before numeric dispatch"),
    }
}

fn emit(text: String, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => fs::write(path, text.as_bytes())
            .map_err(|e| CliError::input(format!("writing {}: {e}", path.display()))),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FTB_LOG")).init();
    let cli = Cli::parse();
    let settings = match resolve_settings(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.code);
        }
    };

    // gen produces an instance file, not a run report
    if let Command::Gen { seed, dim, grid, constraints } = &cli.command {
        return match commands::cmd_gen(*seed, *dim, *grid, *constraints) {
            Ok(file) => match emit(file.to_json(), &settings.out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {}", e.message);
                    ExitCode::from(e.code)
                }
            },
            Err(e) => {
                eprintln!("error: {}", e.message);
                ExitCode::from(e.code)
            }
        };
    }

    let outcome = if settings.exact {
        run_command::<BigRational>(&cli, &settings)
    } else {
        run_command::<f64>(&cli, &settings)
    };
    match outcome {
        Ok(report) => {
            let text = match settings.format {
                OutputFormat::Json => report.to_json(),
                OutputFormat::Csv => report.to_csv(),
            };
            match emit(text, &settings.out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {}", e.message);
                    ExitCode::from(e.code)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
