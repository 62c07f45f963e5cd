use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use photon_splitter_cli::{list_experiments, run_file, Overrides};

#[derive(Parser)]
#[command(name = "photon-splitter", version, about = "Single-photon beam-splitter experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `out` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: one per core). Results do not depend on it.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        threads: Option<u64>,
    },
    /// List experiments with their config keys and defaults.
    List,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, seed, out, threads } => {
            let overrides = Overrides { seed, out, threads: threads.map(|t| t as usize) };
            ExitCode::from(run_file(&config, &overrides) as u8)
        }
        Command::List => {
            print!("{}", list_experiments());
            ExitCode::SUCCESS
        }
    }
}
