//! Command-line driver for verification campaigns.
//!
//! Reports are newline-delimited JSON records with every number rendered as
//! an exact `num/den` string. Exit codes: 0 all verified, 1 any refuted,
//! 2 inconclusive present, 3 usage error.

mod config;
mod run;

use clap::error::ErrorKind;
use clap::Parser;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "odometer", version, about = "Exact verification of odometer operator claims")]
pub struct Cli {
    /// Config file (key=value lines); defaults to $ODOMETER_CONFIG when set.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Parallelism degree for scans: 1 = sequential, 0 = all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Enclosure width tolerance as `num/den`.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Coordinate depth cap for tail-resolving sweeps.
    #[arg(long, global = true)]
    depth_cap: Option<u64>,
    /// Seed for randomized sampling (ChaCha20).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Append report records to this file in addition to stdout.
    #[arg(long, global = true)]
    output: Option<std::path::PathBuf>,
    /// Write scan tables as CSV to this file.
    #[arg(long, global = true)]
    csv: Option<std::path::PathBuf>,
    #[command(subcommand)]
    cmd: run::Cmd,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(3);
        }
    };
    match run::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(run::CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(3)
        }
        Err(run::CliError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(3)
        }
        Err(run::CliError::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
