//! Command-line front end for the supply-chain fragility library.
//!
//! `supplyfrag figure <name>` writes figure data as CSV; the analysis
//! commands write TOML result documents. See [`run`] for exit codes.

pub mod commands;
pub mod config;
mod error;
pub mod figures;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use commands::Command;
pub use config::RunConfig;
pub use error::CliError;

/// Environment variable that sets the number of worker threads.
pub const THREADS_ENV: &str = "SUPPLYFRAG_THREADS";

#[derive(Debug, Parser)]
#[command(name = "supplyfrag", version, about = "Supply chain fragility analyses")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Emit the data behind one figure as CSV.
    Figure {
        /// One of the figure identifiers, e.g. `crit`.
        name: String,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Layer-by-layer sourcing dynamics.
    Propagate(RunArgs),
    /// Social planner solution and welfare comparison.
    Planner(RunArgs),
    /// Monte Carlo on an explicit network.
    Simulate(RunArgs),
    /// Perfect-information simulation.
    PerfectInfo(RunArgs),
    /// Perfect information against opaque sourcing.
    Compare(RunArgs),
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if seed.is_some() {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn write_output(text: &str, out: Option<&Path>, cfg: &RunConfig) -> Result<(), CliError> {
    let target = out.map(Path::to_path_buf).or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    match target {
        Some(p) => std::fs::write(&p, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(sub: Sub) -> Result<(), CliError> {
    let (args, text_of): (RunArgs, Box<dyn FnOnce(&RunConfig) -> Result<String, CliError>>) = match sub {
        Sub::Figure { name, args } => (
            args,
            Box::new(move |cfg| figures::figure(&name, cfg).map(|t| t.to_csv())),
        ),
        Sub::Propagate(a) => (a, Box::new(|cfg| commands::execute(Command::Propagate, cfg))),
        Sub::Planner(a) => (a, Box::new(|cfg| commands::execute(Command::Planner, cfg))),
        Sub::Simulate(a) => (a, Box::new(|cfg| commands::execute(Command::Simulate, cfg))),
        Sub::PerfectInfo(a) => (a, Box::new(|cfg| commands::execute(Command::PerfectInfo, cfg))),
        Sub::Compare(a) => (a, Box::new(|cfg| commands::execute(Command::Compare, cfg))),
    };
    let cfg = load_config(args.config.as_deref(), args.seed)?;
    let text = text_of(&cfg)?;
    write_output(&text, args.out.as_deref(), &cfg)
}

/// Sizes the global worker pool from [`THREADS_ENV`], if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV}: {raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("{THREADS_ENV}: {e}")))
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 2 for configuration problems, 3 for
/// numerical failures and 1 for i/o errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("supplyfrag: {e}");
            e.exit_code()
        }
    }
}
