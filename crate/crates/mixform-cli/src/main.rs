//! Command-line harness for the mixform toolkit.
//!
//! Every subcommand reads one fail-closed `key = value` config, writes
//! deterministic CSV reports plus a `manifest.txt` into `--out`, and exits
//! with 0 when every check row passed, 1 when the run completed but some
//! check failed, and 2 on any error (bad config, solver breakdown, I/O).

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;

#[derive(Parser)]
#[command(
    name = "mixform",
    version,
    about = "Verification harness for divergence-form operators with mixed boundary conditions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the key = value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for every randomized sweep in the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a chart atlas: determinants, inverses, continuity, membership.
    CheckGeometry(RunArgs),
    /// Cross-check the operator calculus (half powers, heat kernels).
    VerifySpectral(RunArgs),
    /// Solve one stationary (quasi)linear problem.
    SolveElliptic(RunArgs),
    /// March one quasilinear parabolic problem.
    SolveParabolic(RunArgs),
    /// Run a refinement study (RIESZ, TRANSFORM, or PARABOLIC_RATE).
    StudyConvergence(RunArgs),
}

type Runner = fn(&Config, &Path, u64) -> mixform::Result<bool>;

fn dispatch(cli: &Cli) -> mixform::Result<bool> {
    let (args, allowed, runner): (&RunArgs, &[&str], Runner) = match &cli.command {
        Command::CheckGeometry(a) => (a, commands::geometry::ALLOWED_KEYS, commands::geometry::run),
        Command::VerifySpectral(a) => (a, commands::spectral::ALLOWED_KEYS, commands::spectral::run),
        Command::SolveElliptic(a) => (a, commands::elliptic::ALLOWED_KEYS, commands::elliptic::run),
        Command::SolveParabolic(a) => (a, commands::parabolic::ALLOWED_KEYS, commands::parabolic::run),
        Command::StudyConvergence(a) => {
            (a, commands::convergence::ALLOWED_KEYS, commands::convergence::run)
        }
    };
    let cfg = Config::load(&args.config, allowed)?;
    std::fs::create_dir_all(&args.out)?;
    runner(&cfg, &args.out, args.seed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e);
            ExitCode::from(2)
        }
    }
}
