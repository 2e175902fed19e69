//! `msynth`: runs synthesis scenarios from TOML configs and writes CSV/JSON
//! data plus a digest manifest.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use synth_core::protocol::EngineChoice;

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "msynth", version, about = "Multiplexed non-Gaussian state synthesizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reflectivity and cat-amplitude scan for cat breeding.
    BreedCats(Common),
    /// GKP synthesis from cat inputs with a momentum herald.
    Gkp(Common),
    /// Squeezed-cat synthesis from single-photon feeds.
    FockFeed(Common),
    /// Herald probability against the iterative cascade.
    SuccessCompare(Common),
    /// Wigner function of one synthesized state.
    Wigner(Common),
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; falls back to $MSYNTH_OUT, then ./msynth-out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 lets rayon decide).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Overrides the engine in the config.
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Fock,
    CoherentRank,
    Auto,
}

impl From<EngineArg> for EngineChoice {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Fock => EngineChoice::Fock,
            EngineArg::CoherentRank => EngineChoice::CoherentRank,
            EngineArg::Auto => EngineChoice::Auto,
        }
    }
}

fn run(name: &str, args: &Common) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("--threads {}: {e}", args.threads)))?;
    let threads = rayon::current_num_threads();
    let out = args
        .out
        .clone()
        .or_else(|| std::env::var_os("MSYNTH_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("msynth-out"));
    let start = Instant::now();
    let (run, echo) = commands::dispatch(name, &args.config, args.engine.map(Into::into))?;
    let elapsed = start.elapsed().as_secs_f64();
    run.outputs
        .write(&out, name, commands::engine_name(run.engine), threads, &echo, elapsed)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::BreedCats(a) => ("breed-cats", a),
        Command::Gkp(a) => ("gkp", a),
        Command::FockFeed(a) => ("fock-feed", a),
        Command::SuccessCompare(a) => ("success-compare", a),
        Command::Wigner(a) => ("wigner", a),
    };
    match run(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msynth: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
