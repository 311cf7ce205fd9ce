mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use manifest::Manifest;

#[derive(Parser)]
#[command(name = "riesz", version, about = "Riesz and Coulomb gas experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat key = value experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the manifest seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, PartialEq, Eq)]
enum Command {
    /// Minimize H_n from equilibrium samples.
    Minimize,
    /// Equidistribution, discrepancy and number-variance scans of a points file.
    Scan {
        /// Points CSV (overrides the `points` key).
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Vertical decay fit for a unit lattice.
    Lattice,
    /// Unit-mass subdivision of a box.
    Partition,
    /// Screening parameter regime check.
    Regime,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numeric(String),
}

impl From<riesz_gas::Error> for CliError {
    fn from(e: riesz_gas::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o: {e}"))
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let mut m = Manifest::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        m.seed = s;
    }
    if let Command::Scan { points: Some(p) } = &cli.command {
        m.points = Some(p.display().to_string());
    }
    std::fs::create_dir_all(&cli.out)?;
    log::info!("manifest sha256 {}", m.hash());
    match &cli.command {
        Command::Minimize => commands::minimize(&m, &cli.out),
        Command::Scan { .. } => commands::scan(&m, &cli.out),
        Command::Lattice => commands::lattice(&m, &cli.out),
        Command::Partition => commands::partition(&m, &cli.out),
        Command::Regime => commands::regime(&m, &cli.out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RIESZ_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numeric error: {msg}");
            ExitCode::from(3)
        }
    }
}
