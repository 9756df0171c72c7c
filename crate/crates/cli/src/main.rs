//! `roadprof`: generate road-profile test batches, run projection algorithms
//! on them, report metrics, and check the built-in reference fixtures.
//!
//! Exit status: 0 success, 1 usage or input error, 2 a fixture failed.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use roadprof::superior::Perturbation;

use config::{HarnessConfig, RunMode};

/// A bad flag, config value or algorithm name.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "roadprof", version, about = "Projection methods for vertical road profiles")]
struct Cli {
    /// TOML file with harness settings
    #[arg(long, global = true, env = "ROADPROF_CONFIG")]
    config: Option<PathBuf>,
    /// master seed of the problem batch
    #[arg(long, global = true, env = "ROADPROF_SEED")]
    seed: Option<u64>,
    /// comma-separated algorithm names (default: all of the mode)
    #[arg(long, global = true, env = "ROADPROF_ALGORITHMS", value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    #[arg(long, global = true, env = "ROADPROF_MODE", value_enum)]
    mode: Option<RunMode>,
    /// slope sets with a minimum drainage grade
    #[arg(long, global = true, env = "ROADPROF_NONCONVEX")]
    nonconvex: bool,
    /// output directory
    #[arg(long, global = true, env = "ROADPROF_OUT")]
    out: Option<PathBuf>,
    /// worker threads (default: one per core)
    #[arg(long, global = true, env = "ROADPROF_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded batch of problems and its manifest
    Generate {
        /// number of problems
        #[arg(long, env = "ROADPROF_COUNT")]
        count: Option<usize>,
        /// regenerate the batch described by an earlier manifest
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Run the selected algorithms on every generated problem
    Run {
        /// perturbation direction for superiorized runs
        #[arg(long, value_enum)]
        perturbation: Option<PerturbationArg>,
    },
    /// Write profile, proximity and distance tables for recorded runs
    Report,
    /// Check the reference fixtures
    Verify {
        #[arg(long, hide = true, default_value_t = 0.0)]
        fault_shift: f64,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum PerturbationArg {
    Away,
    Toward,
}

impl Cli {
    fn config(&self) -> anyhow::Result<HarnessConfig> {
        let mut c = match &self.config {
            Some(p) => HarnessConfig::load(p)?,
            None => HarnessConfig::from_toml(config::DEFAULT_TOML)?,
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(a) = &self.algorithms {
            c.algorithms = a.iter().filter(|s| !s.trim().is_empty()).cloned().collect();
        }
        if let Some(m) = self.mode {
            c.mode = m;
        }
        c.nonconvex |= self.nonconvex;
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        if self.jobs.is_some() {
            c.jobs = self.jobs;
        }
        match &self.command {
            Command::Generate { count: Some(n), .. } => c.count = *n,
            Command::Run { perturbation: Some(p) } => {
                c.perturbation = match p {
                    PerturbationArg::Away => Perturbation::AwayFromAnchor,
                    PerturbationArg::Toward => Perturbation::TowardAnchor,
                }
            }
            _ => {}
        }
        c.validate()?;
        Ok(c)
    }

    fn execute(&self) -> anyhow::Result<bool> {
        if let Command::Verify { fault_shift } = self.command {
            return commands::verify(fault_shift);
        }
        let cfg = self.config()?;
        log::debug!("{cfg:?}");
        match &self.command {
            Command::Generate { manifest, .. } => commands::generate(&cfg, manifest.as_deref())?,
            Command::Run { .. } => commands::run_cmd(&cfg)?,
            Command::Report => {
                commands::report(&cfg)?;
            }
            Command::Verify { .. } => unreachable!(),
        }
        Ok(true)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ROADPROF_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.execute() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            if e.is::<UsageError>() {
                eprintln!("usage error: {e:#}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
