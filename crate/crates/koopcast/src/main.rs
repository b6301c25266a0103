use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use koopcast::config::{parse_config, ExperimentConfig};
use koopcast::pipeline::{run, Mode};

/// Kernel-based Koopman operator learning and forecasting for ergodic
/// dynamical systems.
#[derive(Parser)]
#[command(name = "koopcast", version, about)]
struct Cli {
    #[command(subcommand)]
    mode: ModeCommand,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Configuration file (`section.key = value` lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides run.seed).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum ModeCommand {
    /// Kernel eigenvalues and eigenfunctions of the training data.
    Eigen(CommonArgs),
    /// Diffusion forecast of the response expectation.
    Df(CommonArgs),
    /// Kernel analog forecast with conditional uncertainty.
    Kaf(CommonArgs),
    /// Nearest-neighbor analog forecast baseline.
    Analog(CommonArgs),
    /// Coherent pattern extraction via the compactified generator.
    Patterns(CommonArgs),
    /// Autocorrelation diagnostics of the reference observable.
    Autocorr(CommonArgs),
    /// Proper orthogonal decomposition baseline.
    Pod(CommonArgs),
}

impl ModeCommand {
    fn split(self) -> (Mode, CommonArgs) {
        match self {
            ModeCommand::Eigen(a) => (Mode::Eigen, a),
            ModeCommand::Df(a) => (Mode::Df, a),
            ModeCommand::Kaf(a) => (Mode::Kaf, a),
            ModeCommand::Analog(a) => (Mode::Analog, a),
            ModeCommand::Patterns(a) => (Mode::Patterns, a),
            ModeCommand::Autocorr(a) => (Mode::Autocorr, a),
            ModeCommand::Pod(a) => (Mode::Pod, a),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (mode, args) = cli.mode.split();
    let mut config = match &args.config {
        Some(path) => match parse_config(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {}", e);
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        None => ExperimentConfig::default_config(),
    };
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    match run(mode, &config) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error ({} stage): {}", mode.name(), e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
