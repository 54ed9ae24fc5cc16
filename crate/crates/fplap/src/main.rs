use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fplap::commands::{cmd_mesh_info, cmd_solve, cmd_study, cmd_verify};
use fplap::{Check, Context, LoadedConfig, Result};

/// Fractional p-Laplacian solver and certificate harness on sampled manifolds.
#[derive(Parser)]
#[command(name = "fplap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Root seed; overrides `run.seed`.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory; overrides `run.out`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem.
    Solve(Common),
    /// Run inequality checks and condition certificates.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Check to run (repeatable); overrides `verify.checks`.
        #[arg(long = "check", value_name = "NAME")]
        checks: Vec<Check>,
    },
    /// Run the configured convergence or uniqueness study.
    Study(Common),
    /// Print mesh statistics and validation results.
    MeshInfo(Common),
}

fn run(cli: Cli) -> Result<i32> {
    let (common, checks) = match &cli.command {
        Command::Solve(c) | Command::Study(c) | Command::MeshInfo(c) => (c, &[][..]),
        Command::Verify { common, checks } => (common, &checks[..]),
    };
    let loaded = LoadedConfig::load(&common.config)?;
    let ctx = Context::new(loaded, common.seed, common.out.clone())?;
    let outcome = match cli.command {
        Command::Solve(_) => cmd_solve(&ctx)?,
        Command::Verify { .. } => cmd_verify(&ctx, checks)?,
        Command::Study(_) => cmd_study(&ctx)?,
        Command::MeshInfo(_) => cmd_mesh_info(&ctx)?,
    };
    for line in &outcome.lines {
        println!("{line}");
    }
    Ok(outcome.code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
