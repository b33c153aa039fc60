use std::collections::VecDeque;

use super::{motor_step, MotorError, MotorParams, MotorState, SAMPLE_PERIOD};

/// Bus latency of the reference hardware, in 100 Hz cycles.
pub const DEFAULT_DELAY_CYCLES: usize = 3;

/// Fixed-depth FIFO: the value pushed at cycle `k` comes out at `k + depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLine {
    queue: VecDeque<f64>,
}

impl DelayLine {
    /// Line of `depth` slots pre-filled with `fill`.
    pub fn new(depth: usize, fill: f64) -> Self {
        Self { queue: std::iter::repeat_n(fill, depth).collect() }
    }

    pub fn depth(&self) -> usize {
        self.queue.len()
    }

    /// Enqueues `u` and returns the command that reaches the motor this cycle.
    pub fn push(&mut self, u: f64) -> f64 {
        if self.queue.is_empty() {
            return u;
        }
        self.queue.push_back(u);
        self.queue.pop_front().expect("non-empty queue")
    }

    /// Commands still in flight, oldest first.
    pub fn pending(&self) -> impl Iterator<Item = f64> + '_ {
        self.queue.iter().copied()
    }
}

/// A delayed motor driven once per control cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct MotorChain {
    pub params: MotorParams,
    pub delay: DelayLine,
    pub state: MotorState,
}

impl MotorChain {
    /// Motor at rest at `y0` with the delay line holding `y0`.
    pub fn at_rest(params: MotorParams, depth: usize, y0: f64) -> Self {
        Self { params, delay: DelayLine::new(depth, y0), state: MotorState { y: y0, y_dot: 0.0 } }
    }

    /// Issues `u`, advances one cycle and returns the position at its end.
    pub fn command(&mut self, u: f64) -> f64 {
        let applied = self.delay.push(u);
        self.state = motor_step(&self.params, self.state, applied, SAMPLE_PERIOD);
        self.state.y
    }
}

/// Predicted motor positions at the end of each of `horizon` cycles, starting
/// with the cycle of the oldest command in `history`.
///
/// `history` holds `(cycle, command)` pairs on consecutive cycles. The motor
/// is in `initial` when that first cycle begins and the delay line holds its
/// position. Cycles past the end of `history` repeat its last command.
pub fn predict_position(
    params: &MotorParams,
    history: &[(i64, f64)],
    initial: MotorState,
    depth: usize,
    horizon: usize,
) -> Result<Vec<f64>, MotorError> {
    params.validate()?;
    if history.len() < depth.max(1) {
        return Err(MotorError::MissingHistory { depth: depth.max(1), available: history.len() });
    }
    if let Some(w) = history.windows(2).find(|w| w[1].0 != w[0].0 + 1) {
        return Err(MotorError::Domain(format!("command history jumps from cycle {} to {}", w[0].0, w[1].0)));
    }
    let mut chain = MotorChain { params: *params, delay: DelayLine::new(depth, initial.y), state: initial };
    let last = history[history.len() - 1].1;
    Ok((0..horizon).map(|j| chain.command(history.get(j).map_or(last, |c| c.1))).collect())
}
