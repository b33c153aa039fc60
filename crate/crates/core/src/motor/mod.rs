//! Second-order position-controlled motor model with a velocity clamp, the
//! command delay line in front of it, and identification of its parameters
//! from recorded step responses.

mod delay;
mod fit;
mod io;
mod model;
pub mod nelder_mead;

pub use delay::{predict_position, DelayLine, MotorChain, DEFAULT_DELAY_CYCLES};
pub use fit::{
    decay_weight, fit_error, fit_error_with, fit_params, weighted_error, FitBounds, FitOptions, FitReport, DECAY,
};
pub use io::{read_step_responses, write_step_responses, StepIoError};
pub use model::{
    motor_step, simulate_delayed_step_response, simulate_step_response, MotorParams, MotorState, StepResponse,
    DEFAULT_SKIP, SAMPLE_PERIOD, SUBSTEP,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotorError {
    #[error("invalid motor parameters: {0}")]
    InvalidParams(String),
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("prediction needs at least {depth} queued commands, got {available}")]
    MissingHistory { depth: usize, available: usize },
}
