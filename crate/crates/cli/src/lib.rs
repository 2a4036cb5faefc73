//! Command-line front end: config loading, subcommands, CSV and SVG output.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
pub mod table;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Context, Report};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hiercode", version, about = "Hierarchical coded computation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode, erase workers and groups, decode, report the error.
    CodecDemo(CommonArgs),
    /// Simulated E[T] against its lower and upper bounds over k2.
    Bounds(CommonArgs),
    /// Expected execution time of four schemes over a grid of alpha.
    Compare(CommonArgs),
    /// Product-to-hierarchical decode cost ratios.
    Ratio(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML experiment config; missing tables use built-in defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for output files; without it the main output goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write an SVG chart (requires --out).
    #[arg(long)]
    pub svg: bool,
    /// Worker threads for Monte Carlo; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Override any config scalar, e.g. `--set bounds.n1=600`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::CodecDemo(a) | Command::Bounds(a) | Command::Compare(a) | Command::Ratio(a) => a,
        }
    }
}

/// Runs one invocation and writes its outputs.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let args = cli.command.args();
    let mut overrides = args.overrides.clone();
    if let Some(t) = args.trials {
        overrides.push(format!("trials={t}"));
    }
    if let Some(s) = args.seed {
        overrides.push(format!("seed={s}"));
    }
    if args.svg && args.out.is_none() {
        return Err(CliError::Config("--svg requires --out".into()));
    }
    if args.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    let cfg = config::load(args.config.as_deref(), &overrides)?;
    let ctx = Context { cfg, threads: args.threads, svg: args.svg };
    let report = match &cli.command {
        Command::CodecDemo(_) => commands::codec_demo(&ctx)?,
        Command::Bounds(_) => commands::bounds(&ctx)?,
        Command::Compare(_) => commands::compare(&ctx)?,
        Command::Ratio(_) => commands::ratio(&ctx)?,
    };
    emit(&report, args.out.as_deref(), stdout)?;
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn emit(report: &Report, out: Option<&std::path::Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(format!("write failed: {e}"));
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(io)?;
        for (name, contents) in &report.files {
            std::fs::write(dir.join(name), contents).map_err(io)?;
        }
    }
    match (&report.summary, out) {
        (Some(text), _) => stdout.write_all(text.as_bytes()).map_err(io)?,
        (None, None) => {
            if let Some((_, primary)) = report.files.first() {
                stdout.write_all(primary.as_bytes()).map_err(io)?;
            }
        }
        (None, Some(_)) => {}
    }
    Ok(())
}
