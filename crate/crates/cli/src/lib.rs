//! Command-line front end for `ruinbound`.
//!
//! - [`config`]: the TOML job file.
//! - [`commands`]: one function per subcommand.
//! - [`report`]: tables rendered as text, JSON lines or CSV.
//! - [`error`]: failures and exit codes.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::{Format, JobConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ruinbound", version, about = "Certified exponential bounds for random-walk suprema and ruin probabilities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; defaults to output.format from the config, else text.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the constants with their certificates and report feasibility.
    Conditions(JobArgs),
    /// Certified tail bound at a fixed δ.
    Bound(JobArgs),
    /// Choose δ for the asymptotic rate and for each requested point.
    Optimize(JobArgs),
    /// Ruin-probability bound for a risk model.
    RuinBound(JobArgs),
    /// Monte Carlo estimates, checked against the bound when δ is set.
    Simulate(JobArgs),
    /// Reproduce the reference examples and compare against their published constants.
    Examples {
        /// 1, 2, 3, 4 or all.
        #[arg(default_value = "all")]
        which: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct JobArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Single threshold (x for walks, u for risk models).
    #[arg(long = "x", visible_alias = "u", conflicts_with = "grid")]
    pub x: Option<f64>,
    /// Thresholds as "start:stop:step".
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl JobArgs {
    /// Loads the config and applies command-line overrides.
    pub fn job(&self) -> Result<JobConfig, CliError> {
        let mut cfg = JobConfig::load(&self.config)?;
        if let Some(d) = self.delta {
            cfg.constants.delta = Some(d);
        }
        if let Some(x) = self.x {
            cfg.simulation.grid = None;
            cfg.simulation.thresholds = vec![x];
        }
        if let Some(g) = &self.grid {
            cfg.simulation.grid = Some(g.clone());
        }
        if let Some(n) = self.trials {
            cfg.simulation.trials = n;
        }
        if let Some(h) = self.horizon {
            cfg.simulation.horizon = h;
        }
        if let Some(s) = self.seed {
            cfg.simulation.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_which(which: &str) -> Result<Vec<u8>, CliError> {
    if which.eq_ignore_ascii_case("all") {
        return Ok(vec![1, 2, 3, 4]);
    }
    which
        .parse::<u8>()
        .ok()
        .filter(|e| (1..=4).contains(e))
        .map(|e| vec![e])
        .ok_or_else(|| CliError::Config(format!("no example {which:?}; choose 1, 2, 3, 4 or all")))
}

/// Runs one command, returning the outcome and the config it used (if any).
pub fn run(cli: &Cli) -> Result<(Outcome, Option<JobConfig>), CliError> {
    let with_job = |args: &JobArgs, f: fn(&JobConfig) -> Result<Outcome, CliError>| {
        let cfg = args.job()?;
        Ok((f(&cfg)?, Some(cfg)))
    };
    match &cli.command {
        Command::Conditions(a) => with_job(a, commands::conditions),
        Command::Bound(a) => with_job(a, commands::bound),
        Command::Optimize(a) => with_job(a, commands::optimize),
        Command::RuinBound(a) => with_job(a, commands::ruin_bound),
        Command::Simulate(a) => with_job(a, commands::simulate),
        Command::Examples { which } => Ok((commands::examples(&parse_which(which)?)?, None)),
    }
}

/// Runs the command, writes its output and returns the process exit code.
pub fn execute(cli: &Cli) -> u8 {
    let (outcome, cfg) = match run(cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let format = cli
        .format
        .or(cfg.as_ref().map(|c| c.output.format))
        .unwrap_or(Format::Text);
    for w in &outcome.report.warnings {
        eprintln!("warning: {w}");
    }
    let text = outcome.report.render(format);
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 1;
    }
    if let Some(path) = cfg.as_ref().and_then(|c| c.output.plot_data.as_ref()) {
        if let Some(csv) = commands::plot_data(&outcome.report) {
            if let Err(e) = std::fs::write(path, csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 1;
            }
        }
    }
    match outcome.failure {
        Some(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        None => 0,
    }
}
