//! `lorentz`: command-line front end for the relativistic diffusion laboratory.
//!
//! Exit codes: 0 when a command ran (whatever the scientific verdict),
//! 1 on verification failures or runtime errors, 2 on invalid input.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use config::RunConfig;
use output::Sink;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(String),
    VerifyFailed(usize),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid input: {m}"),
            CliError::Run(m) => write!(f, "error: {m}"),
            CliError::VerifyFailed(n) => write!(f, "verification failed: {n} identities above tolerance"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) | CliError::VerifyFailed(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lorentz", version, about = "Relativistic diffusion on Lorentzian frame bundles")]
struct Cli {
    /// TOML run configuration; Minkowski defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed (and LORENTZ_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for ensemble runs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; reports go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One trajectory: CSV plus summary JSON.
    Simulate,
    /// Explosion probability with a Wilson interval.
    Estimate,
    /// Hypothesis checker for lemma7, lemma11, thm8 or thm12.
    Check { theorem: Option<String> },
    /// Identity and oracle residual sweep.
    Verify,
    /// Far-cap exit fraction for a geodesic tube.
    Tube,
    /// Moment curve of a fiber functional.
    Moments,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::parse("[spacetime]\nid = \"minkowski\"\n")?,
    };
    if let Ok(s) = std::env::var("LORENTZ_SEED") {
        cfg.diffusion.seed =
            s.trim().parse().map_err(|_| CliError::Config(format!("LORENTZ_SEED must be a u64, got `{s}`")))?;
    }
    if let Some(s) = cli.seed {
        cfg.diffusion.seed = s;
    }
    if cli.out.is_some() {
        cfg.output.dir = cli.out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be >= 1".into()));
    }
    let cfg = load(&cli)?;
    let sink = Sink::new(cfg.output.dir.clone());
    let threads = cli.threads;
    let body = move || match &cli.command {
        Command::Simulate => commands::simulate(&cfg, &sink),
        Command::Estimate => commands::estimate(&cfg, &sink),
        Command::Check { theorem } => {
            let th = theorem.clone().or_else(|| cfg.experiment.theorem.clone()).ok_or_else(|| {
                CliError::Config(format!("check needs a theorem, one of {:?}", commands::THEOREMS))
            })?;
            commands::check(&cfg, &th, &sink)
        }
        Command::Verify => commands::verify(&cfg, &sink),
        Command::Tube => commands::tube(&cfg, &sink),
        Command::Moments => commands::moments(&cfg, &sink),
    };
    lorentz_core::montecarlo::with_threads(threads, body)?
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lorentz: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
