//! Simulated kick: task-space foot primitives, delayed motors tracking the
//! setpoints, a cart-table body balanced by the preview controller and a
//! rolling-ball estimate of the kick distance.

mod ball;
mod demo;
mod export;
mod scenario;
mod sim;
mod sweep;

pub use ball::{ball_distance, BallModel};
pub use demo::{nominal_primitive, DemoShape, DEMO_DT, NOMINAL_BASES};
pub use export::{write_com_csv, write_foot_csv, write_zmp_csv, ZMP_CSV_HEADER};
pub use scenario::{plan_kick, KickScenario, Push};
pub use sim::{run_kick, Contact, KickRig, SimLog, SimSettings, SimSummary};
pub use sweep::{sweep, GridSpec, ScenarioOutcome, SweepEntry, SweepReport, GRID_KEYS};

use thiserror::Error;

use crate::balance::BalanceError;
use crate::dmp::DmpError;
use crate::motor::MotorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KickError {
    #[error(transparent)]
    Dmp(#[from] DmpError),
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Motor(#[from] MotorError),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("invalid grid spec: {0}")]
    Grid(String),
    #[error("ZMP left the support polygon at t = {t:.2} s")]
    Unstable { t: f64 },
}
