use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mweyl_cli::{run, CliError, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "mweyl", version, about = "Weyl-matrix sampling and potential reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for data files and report.json.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for randomly generated test problems; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sample the Weyl matrix on the contour and the tail ray.
    Forward,
    /// Reconstruct Q, A and h from a Weyl sample file.
    Invert,
    /// Forward followed by inversion, with error norms against the input problem.
    Roundtrip,
    /// Scan for zeros of the Jost determinant.
    Zeros,
    /// Convert and check a boundary condition.
    ValidateBc,
}

impl Command {
    fn mode(self) -> Mode {
        match self {
            Command::Forward => Mode::Forward,
            Command::Invert => Mode::Invert,
            Command::Roundtrip => Mode::Roundtrip,
            Command::Zeros => Mode::Zeros,
            Command::ValidateBc => Mode::ValidateBc,
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut config = RunConfig::load(path)?;
    config.mode = Some(cli.command.mode());
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let report = run(&config, &cli.out)?;
    for f in &report.files {
        log::info!("{} sha256 {}", f.path.display(), f.sha256);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
