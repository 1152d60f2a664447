//! `plate6`: material checks, solves, verification and the equivalence audit.
//!
//! Exit codes: 0 success, 1 check or convergence failure, 2 input error.

mod commands;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "plate6", version, about = "Geometrically exact 6-parameter plate model")]
struct Cli {
    /// Worker threads for energy and gradient reductions (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report every definiteness inequality and the coercivity constants of a material file.
    CheckMaterial {
        /// Material JSON document.
        #[arg(long = "config", value_name = "PATH")]
        material: PathBuf,
        /// Directory for check.json.
        #[arg(long, value_name = "DIR")]
        output: Option<PathBuf>,
    },
    /// Minimize the plate energy and write fields, history and reports.
    Solve {
        /// Run configuration JSON document.
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Output directory (overrides the configuration).
        #[arg(long, value_name = "DIR")]
        output: Option<PathBuf>,
        /// Seed for restarts (overrides the configuration).
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
    },
    /// Check the gradient, frame indifference and equilibrium residual of a configuration.
    Verify {
        /// Run configuration JSON document.
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Output directory for verify.json (overrides the configuration).
        #[arg(long, value_name = "DIR")]
        output: Option<PathBuf>,
        /// Seed for random directions and motions (overrides the configuration).
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        /// Relative tolerance of the gradient check (overrides the configuration).
        #[arg(long, value_name = "X")]
        tolerance: Option<f64>,
    },
    /// Compare a Cosserat energy with the isotropic energy of its identified coefficients.
    Equivalence {
        /// Cosserat material JSON document.
        #[arg(long = "config", value_name = "PATH")]
        material: PathBuf,
        /// Directory for equivalence.json.
        #[arg(long, value_name = "DIR")]
        output: Option<PathBuf>,
        #[arg(long, value_name = "N", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "N", default_value_t = 10_000)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = run(cli);
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<bool, commands::CliError> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(commands::CliError::Input("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| commands::CliError::Input(format!("cannot size the thread pool: {e}")))?;
    }
    match cli.command {
        Command::CheckMaterial { material, output } => commands::check_material(&material, output.as_deref()),
        Command::Solve { config, output, seed } => commands::solve(&config, output.as_deref(), seed),
        Command::Verify {
            config,
            output,
            seed,
            tolerance,
        } => commands::verify(&config, output.as_deref(), seed, tolerance),
        Command::Equivalence {
            material,
            output,
            seed,
            samples,
        } => commands::equivalence(&material, output.as_deref(), seed, samples),
    }
}
