//! Dynamic movement primitives whose moving target ends with a requested
//! velocity, plus the forcing-term scale factor that keeps the learned shape
//! sensible when that velocity changes.
//!
//! A primitive is one-dimensional; [`MultiDmp`] stacks independent
//! primitives for translational task-space motions.

mod canonical;
mod forcing;
mod imitate;
mod system;
mod target;
mod trajectory;

pub use canonical::{derive_alpha_s, phase_at, CanonicalSystem, DEFAULT_PHASE_END};
pub use forcing::{ForcingTerm, NEIGHBOUR_ACTIVATION};
pub use imitate::{forcing_targets, imitate, imitate_channel, LearnedDim, LearnedPrimitive};
pub use system::{velocity_scale, DmpParams, DmpState, DmpSystem, MultiDmp, StartState, DEFAULT_SANITY_BOUND, SUBSTEP};
pub use target::{Boundary, MovingTarget};
pub use trajectory::{Channel, Trajectory, TrajectoryIoError};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DmpError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error(
        "goal velocity baseline {goal_dot} equals the start velocity {start_velocity}; \
         the velocity scale is undefined, choose a scale explicitly"
    )]
    DegenerateBaseline { goal_dot: f64, start_velocity: f64 },
    #[error("rollout diverged at t = {t}: |y| = {y} exceeds the sanity bound")]
    Unstable { t: f64, y: f64 },
    #[error("no execution time left at t = {t} (tau = {tau})")]
    NoTimeRemaining { t: f64, tau: f64 },
    #[error("cannot step to t = {t}, past the end of the movement (tau = {tau})")]
    PastEnd { t: f64, tau: f64 },
    #[error("basis {basis} has total activation {activation:e} over the demonstration")]
    IllConditioned { basis: usize, activation: f64 },
    #[error("demonstration has {samples} samples, fewer than the {bases} requested bases")]
    TooFewSamples { samples: usize, bases: usize },
}
