use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pathlab::experiments::{run, Command, ExperimentConfig};
use pathlab::Error;

/// Lattice path-integral experiments.
#[derive(Debug, Parser)]
#[command(name = "pathlab", version, about)]
struct Cli {
    /// JSON experiment configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Sub {
    /// Lattice kernel matrix and convergence table.
    Kernel,
    /// Step a Gaussian packet through every slice.
    Evolve,
    /// Transition quantities at every interior node.
    Transition,
    /// Stationary path for the configured endpoints.
    ClassicalPath,
    /// Compare <x>/K with the stationary path and scan hbar.
    TheoremCheck,
    /// Stationarity residual, Hessian certificate and perturbation probe.
    VariationalCheck,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Kernel => Command::Kernel,
            Sub::Evolve => Command::Evolve,
            Sub::Transition => Command::Transition,
            Sub::ClassicalPath => Command::ClassicalPath,
            Sub::TheoremCheck => Command::TheoremCheck,
            Sub::VariationalCheck => Command::VariationalCheck,
        }
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(&Error::Config("--threads must be positive".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&Error::Config(e.to_string()));
        }
    }
    let mut cfg = match &cli.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        },
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out_dir = cli
        .out
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("pathlab-out"));
    cfg.output_dir = Some(out_dir.display().to_string());

    let command = Command::from(cli.command);
    let outcome = match run(command, &cfg) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    match outcome.files.commit(&out_dir) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => return fail(&e),
    }
    println!("{}: {}", command.name(), outcome.summary);
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("{}: numerical check failed", command.name());
        ExitCode::from(2)
    }
}
