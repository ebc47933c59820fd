use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use talbot_cli::{parse_config, run, CliError, Command};
use talbot_core::Preset;

#[derive(Parser)]
#[command(
    name = "talbot",
    version,
    about = "Two-grating electron Talbot interferometer simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Flux through G2 over separation and shift, as PGM and CSV.
    Carpet(Common),
    /// Transmission curve over G2 shifts at one separation.
    Moire(Common),
    /// One far-field detector frame.
    Farfield(Common),
    /// Far-field frames over one period of G2 shift (finite wavefront radius).
    Demag(Common),
    /// Fit the wavefront radius to a frame stack.
    Fit {
        #[command(flatten)]
        common: Common,
        /// index.csv of the frame stack to fit.
        #[arg(long)]
        frames: PathBuf,
    },
    /// Measured revival period against the geometric prediction.
    RevivalPeriod(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration file.
    config: PathBuf,
    /// Output directory (created if missing).
    out: PathBuf,
    /// Numerical scale; overrides grid.preset.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Worker threads (default: all cores, or RAYON_NUM_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Noise seed; overrides noise.seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Paper,
    Test,
}

fn execute(cli: Cli) -> Result<String, CliError> {
    let (command, common) = match cli.command {
        Cmd::Carpet(c) => (Command::Carpet, c),
        Cmd::Moire(c) => (Command::Moire, c),
        Cmd::Farfield(c) => (Command::Farfield, c),
        Cmd::Demag(c) => (Command::Demag, c),
        Cmd::Fit { common, frames } => (Command::Fit { frames }, common),
        Cmd::RevivalPeriod(c) => (Command::RevivalPeriod, c),
    };
    let text = std::fs::read_to_string(&common.config).map_err(|source| CliError::Io {
        path: common.config.clone(),
        source,
    })?;
    let preset = common.preset.map(|p| match p {
        PresetArg::Paper => Preset::Paper,
        PresetArg::Test => Preset::Test,
    });
    let mut config = parse_config(&text, preset)?;
    if let Some(seed) = common.seed {
        config.noise.seed = seed;
    }
    run(&command, &config, &common.out, common.threads)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("talbot: {e}");
            ExitCode::FAILURE
        }
    }
}
