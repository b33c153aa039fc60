use serde::{Deserialize, Serialize};

use super::{DelayLine, MotorError};

/// Control and measurement period of the motor bus (100 Hz).
pub const SAMPLE_PERIOD: f64 = 0.01;
/// Integration substep beneath the sample grid.
pub const SUBSTEP: f64 = 1e-3;
/// Leading samples of a recorded step response that only show the bus delay.
pub const DEFAULT_SKIP: usize = 3;

/// Time constant `T` (s), damping `D` and velocity limit `v_max` (units/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorParams {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub v_max: f64,
}

impl MotorParams {
    pub fn new(t: f64, d: f64, v_max: f64) -> Result<Self, MotorError> {
        let p = Self { t, d, v_max };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MotorError> {
        for (name, v) in [("T", self.t), ("D", self.d), ("v_max", self.v_max)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(MotorError::InvalidParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(-self.v_max, self.v_max)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MotorState {
    pub y: f64,
    pub y_dot: f64,
}

/// Integrates `T^2 y'' + 2 D T clamp(y') + y = u` over `dt` with explicit
/// Euler substeps of at most 1 ms. The velocity is clamped symmetrically to
/// `v_max`, both inside the damping term and after every substep.
pub fn motor_step(params: &MotorParams, state: MotorState, u: f64, dt: f64) -> MotorState {
    let k = ((dt / SUBSTEP) - 1e-9).ceil().max(1.0) as usize;
    let h = dt / k as f64;
    let (t, d) = (params.t, params.d);
    let MotorState { mut y, mut y_dot } = state;
    for _ in 0..k {
        let v = params.clamp(y_dot);
        let acc = (u - y - 2.0 * d * t * v) / (t * t);
        y += h * v;
        y_dot = params.clamp(v + h * acc);
    }
    MotorState { y, y_dot }
}

/// Measured (or simulated) reaction to a step command issued at `t = 0`,
/// sampled every 10 ms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    pub height: f64,
    pub samples: Vec<f64>,
    pub skip: usize,
}

impl StepResponse {
    pub fn new(height: f64, samples: Vec<f64>, skip: usize) -> Result<Self, MotorError> {
        if samples.is_empty() {
            return Err(MotorError::Domain("step response has no samples".into()));
        }
        if skip >= samples.len() {
            return Err(MotorError::Domain(format!("skip of {skip} leaves nothing of {} samples", samples.len())));
        }
        Ok(Self { height, samples, skip })
    }

    /// Samples that take part in fitting.
    pub fn fitted(&self) -> &[f64] {
        &self.samples[self.skip..]
    }
}

/// Undelayed model response from rest at zero, `n` samples starting at `t = 0`.
pub fn simulate_step_response(params: &MotorParams, height: f64, n: usize) -> StepResponse {
    let mut state = MotorState::default();
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            state = motor_step(params, state, height, SAMPLE_PERIOD);
        }
        samples.push(state.y);
    }
    StepResponse { height, samples, skip: 0 }
}

/// Response as it would be recorded through a bus that delays every command
/// by `delay` cycles. The returned response skips exactly those cycles.
pub fn simulate_delayed_step_response(params: &MotorParams, height: f64, n: usize, delay: usize) -> StepResponse {
    let mut line = DelayLine::new(delay, 0.0);
    let mut state = MotorState::default();
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            let u = line.push(height);
            state = motor_step(params, state, u, SAMPLE_PERIOD);
        }
        samples.push(state.y);
    }
    StepResponse { height, samples, skip: delay.min(n.saturating_sub(1)) }
}
