//! Command-line front end: configuration, experiment pipelines and CSV outputs.

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_conjecture, cmd_evaluate, cmd_plan, cmd_project, cmd_reconstruct, cmd_simulate,
};
pub use config::{ExperimentConfig, Overrides};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "eastp", version, about = "Energy-aware sparse projections for sensor fields")]
pub struct Cli {
    /// TOML config file; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Optimal, baseline and all-active plans per signal length.
    Plan,
    /// Project one signal with the optimal plan.
    Project,
    /// Decode projections written by `project`.
    Reconstruct,
    /// Run the distributed protocol with energy and message accounting.
    Simulate,
    /// Sign experiment for the derivative of the length cap.
    Conjecture,
    /// Reconstruction error of every method across lengths and seeds.
    Evaluate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Plan => "plan",
            Command::Project => "project",
            Command::Reconstruct => "reconstruct",
            Command::Simulate => "simulate",
            Command::Conjecture => "conjecture",
            Command::Evaluate => "evaluate",
        }
    }
}

pub fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&cli.overrides);
    cfg.validate()?;
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = load_config(cli)?;
    log::info!("{}: master seed {}", cli.command.name(), cfg.seed);
    match cli.command {
        Command::Plan => cmd_plan(&cfg),
        Command::Project => cmd_project(&cfg),
        Command::Reconstruct => cmd_reconstruct(&cfg),
        Command::Simulate => cmd_simulate(&cfg),
        Command::Conjecture => cmd_conjecture(&cfg),
        Command::Evaluate => cmd_evaluate(&cfg),
    }
}

/// Parses `args`, runs the command and maps failures to exit codes
/// (1 for invalid input, 2 for runtime failures).
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(outputs) => {
            for p in outputs {
                log::info!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
