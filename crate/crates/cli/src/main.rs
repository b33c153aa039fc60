//! `kickdmp`: fit motor models, learn and roll out primitives, and run
//! simulated kicks.
//!
//! Exit status: 0 success, 1 bad input, 2 no convergence, 3 unstable kick.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("unstable: {0}")]
    Unstable(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::NotConverged(_) => 2,
            CliError::Unstable(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "kickdmp", version, about = "Kick motions from movement primitives with motor and balance models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Print the fully resolved configuration and exit.
    #[arg(long)]
    echo_config: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit (T, D, v_max) to recorded step responses.
    FitMotor {
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Leading samples per response that only show the bus delay.
        #[arg(long, default_value_t = kickdmp::motor::DEFAULT_SKIP)]
        skip: usize,
        /// Initial guess `T,D,v_max`.
        #[arg(long, value_parser = commands::parse_triple)]
        init: Option<[f64; 3]>,
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Learn primitive weights from a demonstration trajectory CSV.
    Imitate {
        demo: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Roll out the configured primitive, optionally changing it on the way.
    Rollout {
        /// Trajectory CSV; standard output when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// New goal position, one value per axis.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        goal: Option<Vec<f64>>,
        /// New goal velocity, one value per axis.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        goal_velocity: Option<Vec<f64>>,
        #[arg(long)]
        tau: Option<f64>,
        /// Apply the goal changes at this time instead of before the start.
        #[arg(long)]
        set_at: Option<f64>,
        /// Forcing scale to use instead of the derived one.
        #[arg(long = "force-A", alias = "force-a", allow_hyphen_values = true)]
        force_a: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate the configured kick and write traces and a summary.
    Kick {
        #[arg(long, short)]
        out_dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate a grid of kick scenarios.
    Sweep {
        /// Grid such as `speed_factor=1,0.75,0.5;ball_dx=0,0.08`.
        #[arg(long, short)]
        grid: String,
        #[arg(long, short)]
        out_dir: PathBuf,
        /// Run scenarios one after another.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Design the preview controller and dump its gains.
    DesignPreview {
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::FitMotor { input, out, skip, init, max_iter, common } => {
            commands::fit_motor(&common, &input, &out, skip, init, max_iter)
        }
        Command::Imitate { demo, out, common } => commands::imitate(&common, &demo, &out),
        Command::Rollout { out, goal, goal_velocity, tau, set_at, force_a, common } => commands::rollout(
            &common,
            out.as_deref(),
            commands::RolloutOverrides { goal, goal_velocity, tau, set_at, force_a },
        ),
        Command::Kick { out_dir, common } => commands::kick(&common, &out_dir),
        Command::Sweep { grid, out_dir, sequential, common } => commands::sweep(&common, &grid, &out_dir, sequential),
        Command::DesignPreview { out, common } => commands::design_preview(&common, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
