use serde::{Deserialize, Serialize};

use super::nelder_mead::NelderMead;
use super::{simulate_step_response, MotorError, MotorParams, StepResponse};
use crate::par::{self, Execution};

/// Per-sample decay of the residual weight; early samples dominate.
pub const DECAY: f64 = 0.85;

pub fn decay_weight(i: usize) -> f64 {
    DECAY.powi(i as i32)
}

/// `sum_i DECAY^i (model[i] - data[i])^2` over the common length.
pub fn weighted_error(model: &[f64], data: &[f64]) -> f64 {
    model.iter().zip(data).enumerate().map(|(i, (m, s))| decay_weight(i) * (m - s).powi(2)).sum()
}

fn response_error(params: &MotorParams, r: &StepResponse) -> f64 {
    let data = r.fitted();
    let model = simulate_step_response(params, r.height, data.len());
    weighted_error(&model.samples, data)
}

/// Decay-weighted squared error of the undelayed model against every
/// response, with the delay samples of each response dropped and the weight
/// index restarting at the first kept sample.
pub fn fit_error(params: &MotorParams, responses: &[StepResponse]) -> Result<f64, MotorError> {
    fit_error_with(params, responses, Execution::Sequential)
}

pub fn fit_error_with(params: &MotorParams, responses: &[StepResponse], exec: Execution) -> Result<f64, MotorError> {
    params.validate()?;
    validate_responses(responses)?;
    let parts = par::map(exec, responses, |r| response_error(params, r));
    Ok(parts.iter().sum())
}

fn validate_responses(responses: &[StepResponse]) -> Result<(), MotorError> {
    if responses.is_empty() {
        return Err(MotorError::Domain("no step responses".into()));
    }
    for (k, r) in responses.iter().enumerate() {
        if r.skip >= r.samples.len() {
            return Err(MotorError::Domain(format!("response {k}: skip covers every sample")));
        }
        if !r.height.is_finite() || r.samples.iter().any(|s| !s.is_finite()) {
            return Err(MotorError::Domain(format!("response {k}: non-finite value")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBounds {
    #[serde(rename = "T")]
    pub t: (f64, f64),
    #[serde(rename = "D")]
    pub d: (f64, f64),
    pub v_max: (f64, f64),
}

impl Default for FitBounds {
    fn default() -> Self {
        Self { t: (1e-3, 2.0), d: (0.05, 20.0), v_max: (1e-2, 1e5) }
    }
}

impl FitBounds {
    fn validate(&self) -> Result<(), MotorError> {
        for (name, (lo, hi)) in [("T", self.t), ("D", self.d), ("v_max", self.v_max)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(MotorError::Domain(format!("bad bounds for {name}: [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn contains(&self, p: &MotorParams) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(p.t, self.t) && inside(p.d, self.d) && inside(p.v_max, self.v_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub bounds: FitBounds,
    pub optimizer: NelderMead,
    /// How each objective evaluation spreads over the responses.
    pub execution: Execution,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { bounds: FitBounds::default(), optimizer: NelderMead::default(), execution: Execution::Sequential }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub v_max: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitReport {
    pub fn params(&self) -> MotorParams {
        MotorParams { t: self.t, d: self.d, v_max: self.v_max }
    }
}

/// Fits `(T, D, v_max)` to recorded step responses by minimizing
/// [`fit_error`] in log-parameter space.
///
/// Responses at two or more distinct heights are needed to separate the
/// velocity limit from the time constant. An exhausted iteration budget is
/// not an error: the best point so far is returned with `converged = false`.
pub fn fit_params(responses: &[StepResponse], init: MotorParams, opts: &FitOptions) -> Result<FitReport, MotorError> {
    init.validate()?;
    opts.bounds.validate()?;
    validate_responses(responses)?;
    if !opts.bounds.contains(&init) {
        return Err(MotorError::Domain(format!("initial guess {init:?} lies outside the bounds")));
    }
    let b = &opts.bounds;
    let lower = [b.t.0.ln(), b.d.0.ln(), b.v_max.0.ln()];
    let upper = [b.t.1.ln(), b.d.1.ln(), b.v_max.1.ln()];
    let x0 = [init.t.ln(), init.d.ln(), init.v_max.ln()];
    let objective = |x: &[f64]| {
        let p = MotorParams { t: x[0].exp(), d: x[1].exp(), v_max: x[2].exp() };
        let parts = par::map(opts.execution, responses, |r| response_error(&p, r));
        parts.iter().sum::<f64>()
    };
    let m = opts.optimizer.minimize(objective, &x0, &lower, &upper);
    Ok(FitReport {
        t: m.x[0].exp(),
        d: m.x[1].exp(),
        v_max: m.x[2].exp(),
        j: m.fx,
        iterations: m.iterations,
        converged: m.converged,
    })
}
