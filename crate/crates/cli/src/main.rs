mod commands;
mod rundir;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use asyncswap::Error;

#[derive(Parser)]
#[command(name = "asyncswap", version, about = "Entanglement swapping and GHZ generation with asynchronous pair sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
pub struct ConfigArgs {
    /// Experiment configuration file.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration: paper-swap or paper-ghz.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a timestamp record.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Overrides the configured RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run directory; defaults to the configured output dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Four-fold extraction, tomography and metrics at each window.
    Analyze {
        #[arg(long)]
        record: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated window widths in ps.
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<i64>>,
        /// Bootstrap seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to the record's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rate and fidelity against window width, with log-log slopes.
    Sweep {
        #[arg(long)]
        record: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Window grid in ps; defaults to the configured sweep grid.
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<i64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct a state from a count table.
    Tomo {
        counts: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entanglement metrics of a density operator file.
    Metrics {
        rho: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coherence time from a D1-D3 start-stop histogram.
    Tauc {
        /// Histogram table (`dt_ps,count`); or use --record.
        #[arg(required_unless_present = "record", conflicts_with = "record")]
        histogram: Option<PathBuf>,
        #[arg(long)]
        record: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub enum Outcome {
    Ok,
    Degraded,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::Io(_) | Error::CorruptRecord(_) | Error::Parse(_) | Error::Unsorted(_) => 3,
        Error::InsufficientCounts(_) | Error::NotEstimable(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, seed, out } => commands::simulate(&config, seed, out),
        Command::Analyze { record, config, windows, seed, out } => commands::analyze(&record, &config, windows, seed, out),
        Command::Sweep { record, config, windows, out } => commands::sweep(&record, &config, windows, out),
        Command::Tomo { counts, config, seed, out } => commands::tomo(&counts, &config, seed, out),
        Command::Metrics { rho, out } => commands::metrics(&rho, out),
        Command::Tauc { histogram, record, config, out } => commands::tauc(histogram, record, &config, out),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Degraded) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
