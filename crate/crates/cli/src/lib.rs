//! `dito`: command-line runs of the `discrete-ito` library.
//!
//! Each run is described by a flat `key=value` config. Layers apply in
//! order: key defaults, `--preset`, `--config`, trailing `key=value`
//! arguments, then `--seed`. A run writes its outputs, the resolved config
//! (`config.txt`) and its wall time (`timing.txt`) to `--out`. Everything but
//! the timing file is byte-identical across runs with the same config.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod commands;
pub mod config;
pub mod error;
pub mod presets;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgMatches, Args, FromArgMatches, Parser, Subcommand};

pub use commands::{run, Outputs};
pub use config::{keys_for, keys_help, Command, KeySpec, RunConfig, KEYS};
pub use error::CliError;

pub const AUDIT_FILE: &str = "config.txt";
pub const TIMING_FILE: &str = "timing.txt";

#[derive(Debug, Parser)]
#[command(name = "dito", version, about = "Discrete Itô decompositions, lattice solvers and weak-order experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Martingale, drift and correction coefficients of one step of f(X).
    Decompose(RunArgs),
    /// Backward induction of E f(X_N) on the reachable-state lattice.
    Solve(RunArgs),
    /// Simulated paths as CSV.
    Simulate(RunArgs),
    /// Monte Carlo or randomized quasi-Monte Carlo estimate of E f(X_N).
    Estimate(RunArgs),
    /// Weak-order fit over a grid of step counts.
    Converge(RunArgs),
    /// Three-atom design moments, obstruction search and order fit.
    CompleteMarket(RunArgs),
    /// List the built-in drivers, fields, payoffs, samplers and presets.
    Catalog,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Config file of key=value lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the `seed` key.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Named built-in config applied before --config.
    #[arg(long)]
    pub preset: Option<String>,
    /// key=value overrides.
    #[arg(value_name = "KEY=VALUE")]
    pub settings: Vec<String>,
}

/// The clap command with each subcommand's key table in its help.
pub fn command() -> clap::Command {
    let mut cmd = <Cli as clap::CommandFactory>::command();
    for c in Command::ALL {
        cmd = cmd.mut_subcommand(c.name(), |s| s.after_help(keys_help(c)));
    }
    cmd
}

/// Resolves the config of a run from its arguments.
pub fn resolve(command: Command, args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::defaults(command);
    if let Some(name) = &args.preset {
        let preset = presets::find(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
        if preset.command != command {
            return Err(CliError::Usage(format!("preset `{name}` belongs to `{}`", preset.command.name())));
        }
        config.apply_text(preset.text)?;
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        config.apply_text(&text)?;
    }
    let overrides = args.settings.join("\n");
    config.apply_text(&overrides)?;
    if let Some(seed) = args.seed {
        config.set("seed", &seed.to_string())?;
    }
    Ok(config)
}

/// Writes the audit file, runs, then writes the outputs and timing.
pub fn execute(config: &RunConfig, out: &Path, threads: Option<usize>) -> Result<Outputs, CliError> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(AUDIT_FILE), config.to_audit())?;
    let outputs = match threads {
        Some(0) => return Err(CliError::Usage("--threads must be positive".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| run(config))?,
        None => run(config)?,
    };
    for (name, content) in &outputs.files {
        std::fs::write(out.join(name), content)?;
    }
    std::fs::write(out.join(TIMING_FILE), format!("wall_time_seconds={:.6}\n", outputs.wall_time))?;
    Ok(outputs)
}

pub fn catalog_listing() -> String {
    let mut out = catalog::listing();
    out.push_str("presets:\n");
    for p in presets::PRESETS {
        out.push_str(&format!("  {:<24}{} ({})\n", p.name, p.about, p.command.name()));
    }
    out
}

fn dispatch(matches: &ArgMatches) -> Result<(), CliError> {
    let cli = Cli::from_arg_matches(matches).map_err(|e| CliError::Usage(e.to_string()))?;
    let (command, args) = match cli.command {
        Sub::Catalog => {
            print!("{}", catalog_listing());
            return Ok(());
        }
        Sub::Decompose(a) => (Command::Decompose, a),
        Sub::Solve(a) => (Command::Solve, a),
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Estimate(a) => (Command::Estimate, a),
        Sub::Converge(a) => (Command::Converge, a),
        Sub::CompleteMarket(a) => (Command::CompleteMarket, a),
    };
    let config = resolve(command, &args)?;
    let outputs = execute(&config, &args.out, args.threads)?;
    print!("{}", outputs.stdout);
    Ok(())
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&matches) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
