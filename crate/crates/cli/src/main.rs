//! `spincharge` command-line runner.
//!
//! Each subcommand writes CSV tables and a JSON sidecar into the output
//! directory. Exit codes: 0 success, 1 invalid input, 2 numerical failure.

// `!(x > bound)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod figures;
mod output;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, ExperimentConfig, Scenario};
use scenarios::Context;
use spincharge::Tolerances;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] spincharge::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "spincharge",
    version,
    about = "Collision-model quantum battery experiments"
)]
struct Cli {
    /// Key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_path`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Scale factor for every numerical tolerance; overrides `numeric_tolerance`.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single trajectory with closed-form companions.
    Trajectory,
    /// Grid over polar angle and interaction time.
    Scan,
    /// Power against the number of atoms per collision.
    Sweep,
    /// Charging dynamics and population snapshots.
    Figure2,
    /// The scaled charge function and Catalan numbers.
    Figure3,
    /// Power against angle, atom number and interaction time.
    Figure4,
    /// Power, ergotropy and purity in the short-time regime.
    Figure5,
    /// Print the closed-form optima.
    Optimal {
        #[arg(long, default_value_t = 1)]
        n_atoms: usize,
    },
}

impl Command {
    fn scenario(&self) -> Option<Scenario> {
        Some(match self {
            Command::Trajectory => Scenario::Trajectory,
            Command::Scan => Scenario::ScanThetaTau,
            Command::Sweep => Scenario::SweepNa,
            Command::Figure2 => Scenario::Figure2,
            Command::Figure3 => Scenario::Figure3,
            Command::Figure4 => Scenario::Figure4,
            Command::Figure5 => Scenario::Figure5,
            Command::Optimal { .. } => return None,
        })
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let (Some(declared), Some(requested)) = (cfg.scenario, cli.command.scenario()) {
        if declared != requested {
            return Err(CliError::Validation(format!(
                "config declares scenario `{declared}` but `{requested}` was requested"
            )));
        }
    }
    let scale = cli.tolerance.or(cfg.numeric_tolerance).unwrap_or(1.0);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(CliError::Validation(format!(
            "tolerance scale must be positive, got {scale}"
        )));
    }
    if cli.threads == Some(0) {
        return Err(CliError::Validation("threads must be >= 1".into()));
    }
    let ctx = Context {
        out: cli
            .out
            .clone()
            .or_else(|| cfg.output_path.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out")),
        tolerances: Tolerances::scaled(scale),
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Trajectory => scenarios::run_trajectory_scenario(&cfg, &ctx),
        Command::Scan => scenarios::run_scan(&cfg, &ctx),
        Command::Sweep => scenarios::run_sweep(&cfg, &ctx),
        Command::Figure2 => figures::figure2(&cfg, &ctx),
        Command::Figure3 => figures::figure3(&cfg, &ctx),
        Command::Figure4 => figures::figure4(&cfg, &ctx),
        Command::Figure5 => figures::figure5(&cfg, &ctx),
        Command::Optimal { n_atoms } => {
            if n_atoms == 0 {
                return Err(CliError::Validation("n_atoms must be >= 1".into()));
            }
            print!("{}", scenarios::optimal_report(n_atoms));
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
