//! `sascomp` command-line front end: runs one computation, writes a CSV or
//! JSON artifact under `--out` and exits 0 (all checks pass), 1 (a check
//! failed) or 2 (invalid configuration).

mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sascomp::models::{ModelKind, ModelSpace};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "sascomp", version, about = "Comparison geometry on Sasakian subriemannian space forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct Common {
    /// heisenberg, su2 or sl2
    #[arg(long, global = true, default_value = "heisenberg", value_parser = parse_kind)]
    pub model: ModelKind,
    /// metric scale of SU(2) / SL(2)
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 1.0)]
    pub c: f64,
    /// ball radius
    #[arg(long = "R", global = true, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    /// comparison curvature
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// resolution (oracle nodes per axis, sample count or heat nodes per axis)
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn parse_kind(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: sascomp::models::ModelError| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ball volume, exponential-map oracle and Bishop table
    Volume,
    /// Geodesic trajectory from the model origin
    Geodesic {
        /// initial covector h0,h1,h2
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [1.0, 1.0, 0.0])]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// SL(2) cut-locus constants and injectivity-domain boundary
    Cutlocus,
    /// Closed-form Riccati solutions against direct integration
    Riccati,
    /// Hessian of the distance against the space-form formula
    Hessian,
    /// Sub-Laplacian and Hessian comparison against curvature k
    Compare,
    /// Heat-equation comparison with the radial barrier (Heisenberg)
    Heat {
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        t_end: f64,
    },
    /// Full acceptance suite
    Selftest,
}

#[derive(Debug)]
pub enum CliError {
    /// invalid configuration (exit 2)
    Config(String),
    /// computation failed (exit 1)
    Failed(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(format!("i/o: {e}"))
    }
}

impl Common {
    pub fn model_space(&self) -> Result<ModelSpace, CliError> {
        ModelSpace::new(self.model, self.c).map_err(|e| CliError::Config(e.to_string()))
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(CliError::Config(format!("--c must be positive, got {}", self.c)));
        }
        if let Some(r) = self.radius {
            if !(r.is_finite() && r >= 0.0) {
                return Err(CliError::Config(format!("--R must be non-negative, got {r}")));
            }
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Config(format!("--tol must be positive, got {t}")));
            }
        }
        if let Some(k) = self.k {
            if !k.is_finite() {
                return Err(CliError::Config("--k must be finite".into()));
            }
        }
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let c = &cli.common;
    c.validate()?;
    let report = match &cli.command {
        Command::Volume => commands::volume(c)?,
        Command::Geodesic { alpha, t_end, steps } => commands::geodesic(c, alpha, *t_end, *steps)?,
        Command::Cutlocus => commands::cutlocus(c)?,
        Command::Riccati => commands::riccati(c)?,
        Command::Hessian => commands::hessian(c)?,
        Command::Compare => commands::compare(c)?,
        Command::Heat { eps, t_end } => commands::heat(c, *eps, *t_end)?,
        Command::Selftest => commands::selftest(c)?,
    };
    let path = output::write(&report, c)?;
    println!(
        "{}: {} -> {}",
        report.command,
        if report.passed { "passed" } else { "FAILED" },
        path.display()
    );
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("invalid configuration: {msg}");
            ExitCode::from(2)
        }
    }
}
