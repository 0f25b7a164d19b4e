//! `ois-shape`: design shaped intensity constellations, compare their rates and
//! simulate LDPC-coded links.
//!
//! Exit status: 0 on success, 2 for configuration or input errors, 3 for
//! numerical failures, 4 for quantization collisions.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AirArgs, GainArgs, GenArgs, ReplayArgs, SimulateArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ois_shape::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(ois_shape::Error::Collision { .. }) => 4,
            CliError::Core(ois_shape::Error::Numerical { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ois-shape", version, about)]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "OIS_SHAPE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a shaped constellation and print its integer levels.
    Gen(GenArgs),
    /// Tabulate the stretching gain against its approximation.
    Gain(GainArgs),
    /// Achievable information rates over an SNR grid.
    Air(AirArgs),
    /// Coded error-rate simulation from a JSON config.
    Simulate(SimulateArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    }
    let failed = match &cli.command {
        Command::Gen(a) => commands::gen(a).map(|_| 0)?,
        Command::Gain(a) => commands::gain(a).map(|_| 0)?,
        Command::Air(a) => commands::air(a)?,
        Command::Simulate(a) => commands::simulate(a).map(|_| 0)?,
        Command::Replay(a) => commands::replay(a)?,
    };
    if failed > 0 {
        eprintln!("error: {failed} value(s) could not be computed");
        return Ok(3);
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
