//! `collonet` — train, evaluate, and check mesh-free Dirichlet PDE
//! solutions on point-cloud boundaries.
//!
//! Exit codes: 0 success (including budget-limited training), 1 usage or
//! configuration error, 2 numerical failure (singular interpolation
//! matrix, non-finite objective).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod expr;
mod files;

/// CLI-level error carrying its exit class.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable files, malformed data: exit 1.
    Usage(String),
    /// The math gave up: exit 2.
    Numerical(String),
}

impl From<collonet_core::Error> for CliError {
    fn from(e: collonet_core::Error) -> Self {
        use collonet_core::Error::*;
        match e {
            SingularMatrix { .. } | NonFiniteStart | NonFiniteObjective => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "collonet",
    version,
    about = "Mesh-free Dirichlet PDE solver: perceptron trial solutions with an exact RBF boundary layer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a solution for a built-in (p1..p5) or user-defined problem
    Solve(SolveArgs),
    /// Evaluate a stored solution at points read from CSV
    Eval(EvalArgs),
    /// Validate a problem setup and report its linear-system health
    Check(CheckArgs),
}

#[derive(Args)]
pub struct SolveArgs {
    /// Built-in problem id (p1..p5) or path to a problem JSON file
    #[arg(long)]
    pub problem: String,
    /// Hidden units (default: 20 for 2-D problems, 40 for 3-D)
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Penalty factor on the boundary term in phase 1
    #[arg(long, default_value_t = 100.0)]
    pub eta: f64,
    /// Seed for the parameter initialization
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Phase-1 iteration budget
    #[arg(long, default_value_t = 2000)]
    pub iters_penalty: usize,
    /// Phase-2 iteration budget
    #[arg(long, default_value_t = 200)]
    pub iters_synergy: usize,
    /// Half-width B of the box [-B, B] on input weights and biases
    #[arg(long = "box", default_value_t = 20.0)]
    pub box_halfwidth: f64,
    /// Output directory for solution.json, accuracy.csv, report.json
    #[arg(long)]
    pub out: PathBuf,
    /// Evaluation-grid resolution per axis
    #[arg(long, default_value_t = 50)]
    pub grid_res: usize,
}

#[derive(Args)]
pub struct EvalArgs {
    /// solution.json written by `solve`
    #[arg(long)]
    pub solution: PathBuf,
    /// CSV of points to evaluate (optionally with a `# dim=..` header)
    #[arg(long)]
    pub points: PathBuf,
    /// Output CSV path (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CheckArgs {
    /// Built-in problem id (p1..p5) or path to a problem JSON file
    #[arg(long)]
    pub problem: String,
}

fn configure_threads() -> Result<(), CliError> {
    match std::env::var("COLLONET_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                collonet_core::configure_threads(Some(n));
                Ok(())
            }
            _ => Err(CliError::Usage(format!(
                "COLLONET_THREADS must be a positive integer, got {raw:?}"
            ))),
        },
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Solve(args) => commands::cmd_solve(args),
        Command::Eval(args) => commands::cmd_eval(args),
        Command::Check(args) => commands::cmd_check(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
