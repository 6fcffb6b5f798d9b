//! Command-line front end for the nonlocal p-Laplacian library.
//!
//! `nlpl <command> --config <file> [--out <dir>] [--threads <n>] [--seed <u64>]`
//! runs one of `kernel-check`, `symbol`, `solve`, `eig`, `sweep`. Each run
//! writes `manifest.txt` (the fully resolved config) next to its results; on
//! failure a JSON error record goes to stderr and to `error.json`.

pub mod config;
pub mod error;
pub mod plot;
pub mod run;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{parse_config, parse_config_for, Command, RunConfig};
pub use error::{CliError, ConfigError, ErrorRecord};
pub use plot::{emit_plot, PlotKind};
pub use run::{manifest, run, RunOutcome, ERROR_FILE, MANIFEST_FILE};

#[derive(Debug, Parser)]
#[command(name = "nlpl", version, about = "Nonlocal gradients, p-Laplacian solves and eigenvalue sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the `out` key.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Random seed; overrides the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Sub {
    /// Check the kernel hypotheses and estimate the asymptotic order.
    KernelCheck,
    /// Evaluate the Fourier transform of Q and the operator multiplier.
    Symbol,
    /// Solve the Dirichlet p-Laplacian problem with a constant load.
    Solve,
    /// Compute eigenpairs at one horizon.
    Eig,
    /// Sweep a list of horizons against the limit problem.
    Sweep,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::KernelCheck => Command::KernelCheck,
            Sub::Symbol => Command::Symbol,
            Sub::Solve => Command::Solve,
            Sub::Eig => Command::Eig,
            Sub::Sweep => Command::Sweep,
        }
    }
}

fn configure(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or(ConfigError::MissingKey { key: "--config".into() })?;
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut config = parse_config_for(&text, Some(cli.command.into()))?;
    if let Some(out) = &cli.out {
        config.set("out", &out.display().to_string())?;
    }
    if let Some(seed) = cli.seed {
        config.set("seed", &seed.to_string())?;
    }
    Ok(config)
}

fn execute(cli: &Cli, config: &RunConfig) -> Result<RunOutcome, CliError> {
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Compute(nlpl::Error::ParameterRange(e.to_string())))?
            .install(|| run(config)),
        None => run(config),
    }
}

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let config = match configure(&cli) {
        Ok(c) => c,
        Err(e) => return report(&e, cli.out.as_ref()),
    };
    match execute(&cli, &config) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => report(&e, Some(&run::output_dir(&config))),
    }
}

fn report(e: &CliError, out: Option<&PathBuf>) -> i32 {
    let json = e.record().to_json();
    eprintln!("{json}");
    if let Some(dir) = out {
        if fs::create_dir_all(dir).is_ok() {
            let _ = fs::write(dir.join(ERROR_FILE), format!("{json}\n"));
        }
    }
    e.exit_code()
}
