//! Command-line front end: problem files in, CSV/JSON/SVG reports out.
//!
//! Exit codes: 0 success, 1 file system error, 2 invalid input,
//! 3 numerical failure, 4 theorem hypotheses not met.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;
pub mod selftest;
pub mod svg;

use config::{FlagValues, RunConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("{0}")]
    Hypothesis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Hypothesis(_) => 4,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mpsl", version, about = "Multi-point Sturm-Liouville spectra, nodal classes and nonlinear solves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Upper end of the eigenvalue window.
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Index range: `a..b`, `a..=b` or a single index.
    #[arg(long)]
    k: Option<String>,
    /// Tolerance override in [1e-14, 1e-2].
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Seed amplitude for branches from zero.
    #[arg(long)]
    eps_seed: Option<f64>,
    /// Comma-separated subset of json,csv,svg (or `all`).
    #[arg(long)]
    format: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn resolve(self, default_k: &str) -> Result<RunConfig, CliError> {
        RunConfig::resolve(
            FlagValues {
                lambda_max: self.lambda_max,
                k: self.k,
                tol: self.tol,
                seed: self.seed,
                eps_seed: self.eps_seed,
                format: self.format,
                out: self.out,
                config: self.config,
            },
            default_k,
        )
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a problem file and report its hypothesis level.
    Validate {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Eigenvalues in [0, lambda-max] with nodal classes.
    Spectrum {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Nodal classes of eigenfunctions by index, or re-read from a spectrum CSV.
    Classify {
        problem: PathBuf,
        #[arg(long)]
        from: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Theorem-based nodal predictions, checked against computed eigenfunctions.
    Predict {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Solve -u'' = lambda f(u) + h by multistart shooting.
    Solve {
        problem: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Trace solution branches of -u'' = lambda f(u).
    Branch {
        problem: PathBuf,
        /// Start from large amplitude at lambda_k/finf.
        #[arg(long)]
        from_infinity: bool,
        /// Stop once a branch crosses lambda = 1.
        #[arg(long)]
        stop_at_one: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Nodal solutions of -u'' = f(u) from branches crossing lambda = 1.
    NodalSolve {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Built-in end-to-end checks.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

fn init_threads() {
    if let Some(n) = std::env::var("MPSL_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0) {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { problem, common } => commands::validate(&problem, &common.resolve("0")?),
        Command::Spectrum { problem, common } => commands::spectrum(&problem, &common.resolve("0")?),
        Command::Classify { problem, from, common } => commands::classify_cmd(&problem, from.as_deref(), &common.resolve("0..6")?),
        Command::Predict { problem, common } => commands::predict(&problem, &common.resolve("0..10")?),
        Command::Solve { problem, lambda, common } => commands::solve(&problem, lambda, &common.resolve("0")?),
        Command::Branch { problem, from_infinity, stop_at_one, common } => {
            commands::branch(&problem, from_infinity, stop_at_one, &common.resolve("0")?)
        }
        Command::NodalSolve { problem, common } => commands::nodal_solve(&problem, &common.resolve("0")?),
        Command::Selftest { common } => selftest::run(&common.resolve("0")?),
    }
}

/// Parses `argv` (including the program name) and runs one command.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
