use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phasesim::config::{parse_config, ModelKind, RunConfig};
use phasesim::{run, write_artifact, Error};

#[derive(Parser)]
#[command(name = "phasesim", version, about = "Weighted phase-space simulations with exact references")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-mode Kerr oscillator.
    Kerr(Common),
    /// Bose-Hubbard lattice, positive-P or truncated Wigner.
    BoseHubbard(Common),
    /// Seeded condensate collision on a ring.
    Collision(Common),
    /// Fermi-Hubbard thermal equilibrium.
    FermiHubbard(Common),
    /// Exact diagonalization on the grid of any oracle-capable config.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trajectories: Option<usize>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_ABORT: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::AbortFloor { .. } => EXIT_ABORT,
        _ => EXIT_CONFIG,
    }
}

fn load(cmd: &Command) -> Result<RunConfig, Error> {
    let (common, allowed): (&Common, &[ModelKind]) = match cmd {
        Command::Kerr(c) => (c, &[ModelKind::Kerr]),
        Command::BoseHubbard(c) => (c, &[ModelKind::BoseHubbardPp, ModelKind::BoseHubbardWigner]),
        Command::Collision(c) => (c, &[ModelKind::Collision]),
        Command::FermiHubbard(c) => (c, &[ModelKind::FermiHubbard]),
        Command::Oracle(c) => (c, &[]),
    };
    let text = std::fs::read_to_string(&common.config).map_err(|e| {
        std::io::Error::new(e.kind(), format!("{}: {e}", common.config.display()))
    })?;
    let cfg = parse_config(&text)?.with_overrides(common.seed, common.trajectories)?;
    if let Command::Oracle(_) = cmd {
        return cfg.as_oracle();
    }
    if !allowed.contains(&cfg.model) {
        return Err(Error::Config(format!(
            "model: {} does not belong to this subcommand",
            cfg.model.name()
        )));
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let artifact = match run(&cfg) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    match write_artifact(&artifact) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    }
    if let Some(a) = &artifact.metadata.aborted {
        eprintln!(
            "aborted: alive fraction {:.4} below floor {} at t = {}",
            a.alive_fraction, a.floor, a.time
        );
        return ExitCode::from(EXIT_ABORT);
    }
    ExitCode::SUCCESS
}
