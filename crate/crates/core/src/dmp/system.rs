use serde::{Deserialize, Serialize};

use super::{Boundary, CanonicalSystem, Channel, DmpError, ForcingTerm, MovingTarget, Trajectory};

/// Integration substep in normalised time (`t / tau`). At `tau = 1` this is
/// a 0.1 ms step.
pub const SUBSTEP: f64 = 1e-4;

pub const DEFAULT_SANITY_BOUND: f64 = 1e6;

/// Forcing scale `A = (gd_new - yd_0) / (gd_orig - yd_0)`.
pub fn velocity_scale(goal_dot_new: f64, goal_dot_orig: f64, y0_dot: f64) -> Result<f64, DmpError> {
    let den = goal_dot_orig - y0_dot;
    let size = 1f64.max(goal_dot_orig.abs()).max(y0_dot.abs());
    if den.abs() <= 1e-12 * size {
        return Err(DmpError::DegenerateBaseline { goal_dot: goal_dot_orig, start_velocity: y0_dot });
    }
    Ok((goal_dot_new - y0_dot) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmpParams {
    pub tau: f64,
    pub alpha_z: f64,
    pub s_end: f64,
}

impl Default for DmpParams {
    fn default() -> Self {
        Self { tau: 1.0, alpha_z: 25.0, s_end: super::DEFAULT_PHASE_END }
    }
}

impl DmpParams {
    /// Critical damping.
    pub fn beta_z(&self) -> f64 {
        self.alpha_z / 4.0
    }

    pub fn validate(&self) -> Result<(), DmpError> {
        if !(self.alpha_z > 0.0) || !self.alpha_z.is_finite() {
            return Err(DmpError::Domain(format!("alpha_z must be positive, got {}", self.alpha_z)));
        }
        CanonicalSystem::new(self.tau, self.s_end).map(|_| ())
    }
}

/// Position, velocity and acceleration the movement starts from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StartState {
    pub y: f64,
    pub y_dot: f64,
    pub y_ddot: f64,
}

/// `z` is the time-scaled velocity `tau * dy/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmpState {
    pub y: f64,
    pub z: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmpSystem {
    alpha_z: f64,
    beta_z: f64,
    tau: f64,
    canonical: CanonicalSystem,
    forcing: ForcingTerm,
    target: MovingTarget,
    start: StartState,
    baseline_goal_dot: f64,
    scale: f64,
    state: DmpState,
    sanity_bound: f64,
}

impl DmpSystem {
    /// Builds a primitive at `t = 0`. The weights in `forcing` are taken to
    /// have been learned for `goal_dot`, so the forcing scale starts at one.
    pub fn new(
        params: DmpParams,
        forcing: ForcingTerm,
        start: StartState,
        goal: f64,
        goal_dot: f64,
    ) -> Result<Self, DmpError> {
        params.validate()?;
        let canonical = CanonicalSystem::new(params.tau, params.s_end)?;
        let target = MovingTarget::fit(
            Boundary { y0: start.y, y0_dot: start.y_dot, y0_ddot: start.y_ddot, goal, goal_dot },
            params.tau,
        )?;
        Ok(Self {
            alpha_z: params.alpha_z,
            beta_z: params.beta_z(),
            tau: params.tau,
            canonical,
            forcing,
            target,
            start,
            baseline_goal_dot: goal_dot,
            scale: 1.0,
            state: DmpState { y: start.y, z: params.tau * start.y_dot, t: 0.0 },
            sanity_bound: DEFAULT_SANITY_BOUND,
        })
    }

    pub fn with_sanity_bound(mut self, bound: f64) -> Self {
        self.sanity_bound = bound;
        self
    }

    /// Stretches the movement to a new duration before it starts. Boundary
    /// velocities and accelerations are rescaled so the path is unchanged
    /// when viewed against the phase.
    pub fn with_tau(self, tau: f64) -> Result<Self, DmpError> {
        if self.state.t != 0.0 {
            return Err(DmpError::Domain("tau can only change before the rollout starts".into()));
        }
        let r = self.tau / tau;
        let start = StartState { y: self.start.y, y_dot: self.start.y_dot * r, y_ddot: self.start.y_ddot * r * r };
        let params = DmpParams { tau, alpha_z: self.alpha_z, s_end: self.canonical.s_end };
        let b = self.target.boundary;
        let mut out = Self::new(params, self.forcing, start, b.goal, b.goal_dot * r)?;
        out.baseline_goal_dot = self.baseline_goal_dot * r;
        out.scale = self.scale;
        out.sanity_bound = self.sanity_bound;
        Ok(out)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha_z(&self) -> f64 {
        self.alpha_z
    }

    pub fn beta_z(&self) -> f64 {
        self.beta_z
    }

    pub fn canonical(&self) -> &CanonicalSystem {
        &self.canonical
    }

    pub fn forcing(&self) -> &ForcingTerm {
        &self.forcing
    }

    pub fn target(&self) -> &MovingTarget {
        &self.target
    }

    pub fn start(&self) -> StartState {
        self.start
    }

    pub fn state(&self) -> DmpState {
        self.state
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn goal(&self) -> f64 {
        self.target.boundary.goal
    }

    pub fn goal_dot(&self) -> f64 {
        self.target.boundary.goal_dot
    }

    pub fn baseline_goal_dot(&self) -> f64 {
        self.baseline_goal_dot
    }

    pub fn phase(&self) -> f64 {
        self.canonical.phase_at(self.state.t)
    }

    pub fn position(&self) -> f64 {
        self.state.y
    }

    /// Velocity in task units per second.
    pub fn velocity(&self) -> f64 {
        self.state.z / self.tau
    }

    /// Acceleration in task units per second squared at the current state.
    pub fn acceleration(&self) -> Result<f64, DmpError> {
        Ok(self.z_rate(self.state.y, self.state.z, self.state.t)? / self.tau)
    }

    /// `dz/dt` of the transformation system.
    fn z_rate(&self, y: f64, z: f64, t: f64) -> Result<f64, DmpError> {
        let s = self.canonical.phase_at(t);
        let (gp, gp_dot, gp_ddot) = self.target.eval(t);
        let f = self.forcing.eval(s)?;
        let tau = self.tau;
        Ok((self.alpha_z * (self.beta_z * (gp - y) + tau * gp_dot - z) + tau * tau * gp_ddot + s * f * self.scale)
            / tau)
    }

    /// Advances the state by `dt` with explicit Euler substeps.
    pub fn step(&mut self, dt: f64) -> Result<(), DmpError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(DmpError::Domain(format!("dt must be positive, got {dt}")));
        }
        if self.state.t > self.tau * (1.0 + 1e-9) {
            return Err(DmpError::PastEnd { t: self.state.t + dt, tau: self.tau });
        }
        let k = ((dt / self.tau / SUBSTEP) - 1e-9).ceil().max(1.0) as usize;
        let h = dt / k as f64;
        let DmpState { mut y, mut z, mut t } = self.state;
        for _ in 0..k {
            let z_dot = self.z_rate(y, z, t)?;
            let y_dot = z / self.tau;
            y += h * y_dot;
            z += h * z_dot;
            t += h;
            if !y.is_finite() || y.abs() > self.sanity_bound {
                return Err(DmpError::Unstable { t, y });
            }
        }
        self.state = DmpState { y, z, t };
        Ok(())
    }

    fn refit_target(&mut self, goal: f64, goal_dot: f64) -> Result<(), DmpError> {
        let t = self.state.t;
        let remaining = self.tau - t;
        if remaining <= 1e-9 * self.tau {
            return Err(DmpError::NoTimeRemaining { t, tau: self.tau });
        }
        // Continue from where the target currently is so it stays C2.
        let (p, v, a) = self.target.eval(t);
        let boundary = Boundary { y0: p, y0_dot: v, y0_ddot: a, goal, goal_dot };
        self.target = if t == 0.0 {
            MovingTarget::fit(boundary, self.tau)?
        } else {
            MovingTarget::fit_from(boundary, t, remaining)?
        };
        Ok(())
    }

    /// Moves the goal position. The forcing scale is left untouched.
    pub fn set_goal(&mut self, goal: f64) -> Result<(), DmpError> {
        if goal == self.goal() {
            return Ok(());
        }
        self.refit_target(goal, self.goal_dot())
    }

    /// Changes the goal velocity and rescales the forcing term accordingly.
    pub fn set_goal_velocity(&mut self, goal_dot: f64) -> Result<(), DmpError> {
        let scale = velocity_scale(goal_dot, self.baseline_goal_dot, self.start.y_dot)?;
        self.set_goal_velocity_with_scale(goal_dot, scale)
    }

    /// Changes the goal velocity with a caller-chosen forcing scale. This is
    /// the way out when the baseline goal velocity equals the start velocity.
    pub fn set_goal_velocity_with_scale(&mut self, goal_dot: f64, scale: f64) -> Result<(), DmpError> {
        if !scale.is_finite() {
            return Err(DmpError::Domain(format!("forcing scale must be finite, got {scale}")));
        }
        if goal_dot != self.goal_dot() {
            self.refit_target(self.goal(), goal_dot)?;
        }
        self.scale = scale;
        Ok(())
    }

    /// Number of samples in a full rollout at period `dt`.
    pub fn sample_count(&self, dt: f64) -> usize {
        (self.tau / dt + 1e-9).floor() as usize + 1
    }

    /// Rolls the movement out from its current state to `tau`.
    pub fn rollout(&self, dt: f64) -> Result<Trajectory, DmpError> {
        self.rollout_with(dt, |_, _| Ok(()))
    }

    /// Like [`rollout`](Self::rollout), calling `hook(k, sys)` before step `k`
    /// so parameters can be changed mid-execution.
    pub fn rollout_with<F>(&self, dt: f64, mut hook: F) -> Result<Trajectory, DmpError>
    where
        F: FnMut(usize, &mut DmpSystem) -> Result<(), DmpError>,
    {
        let mut sys = self.clone();
        let n = sys.sample_count(dt);
        let t0 = sys.state.t;
        let mut times = Vec::with_capacity(n);
        let mut ch = Channel::with_capacity(n);
        for k in 0..n {
            if k > 0 {
                hook(k - 1, &mut sys)?;
                sys.step(dt)?;
            }
            times.push(t0 + k as f64 * dt);
            ch.push(sys.position(), sys.velocity(), sys.acceleration()?);
        }
        Trajectory::new(dt, times, vec![ch]).map_err(|e| DmpError::Numeric(e.to_string()))
    }
}

/// Independent primitives sharing one execution time, one per task-space axis.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiDmp {
    dims: Vec<DmpSystem>,
}

impl MultiDmp {
    pub fn new(dims: Vec<DmpSystem>) -> Result<Self, DmpError> {
        let Some(first) = dims.first() else {
            return Err(DmpError::Domain("need at least one dimension".into()));
        };
        if dims.iter().any(|d| d.tau() != first.tau()) {
            return Err(DmpError::Domain("all dimensions must share tau".into()));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[DmpSystem] {
        &self.dims
    }

    pub fn dims_mut(&mut self) -> &mut [DmpSystem] {
        &mut self.dims
    }

    pub fn tau(&self) -> f64 {
        self.dims[0].tau()
    }

    pub fn time(&self) -> f64 {
        self.dims[0].state().t
    }

    pub fn phase(&self) -> f64 {
        self.dims[0].phase()
    }

    pub fn step(&mut self, dt: f64) -> Result<(), DmpError> {
        self.dims.iter_mut().try_for_each(|d| d.step(dt))
    }

    pub fn positions(&self) -> Vec<f64> {
        self.dims.iter().map(DmpSystem::position).collect()
    }

    pub fn velocities(&self) -> Vec<f64> {
        self.dims.iter().map(DmpSystem::velocity).collect()
    }

    pub fn with_tau(self, tau: f64) -> Result<Self, DmpError> {
        Self::new(self.dims.into_iter().map(|d| d.with_tau(tau)).collect::<Result<_, _>>()?)
    }

    pub fn rollout(&self, dt: f64) -> Result<Trajectory, DmpError> {
        self.rollout_with(dt, |_, _| Ok(()))
    }

    pub fn rollout_with<F>(&self, dt: f64, mut hook: F) -> Result<Trajectory, DmpError>
    where
        F: FnMut(usize, &mut MultiDmp) -> Result<(), DmpError>,
    {
        let mut sys = self.clone();
        let n = sys.dims[0].sample_count(dt);
        let t0 = sys.time();
        let mut times = Vec::with_capacity(n);
        let mut chans: Vec<Channel> = (0..sys.dims.len()).map(|_| Channel::with_capacity(n)).collect();
        for k in 0..n {
            if k > 0 {
                hook(k - 1, &mut sys)?;
                sys.step(dt)?;
            }
            times.push(t0 + k as f64 * dt);
            for (d, ch) in sys.dims.iter().zip(chans.iter_mut()) {
                ch.push(d.position(), d.velocity(), d.acceleration()?);
            }
        }
        Trajectory::new(dt, times, chans).map_err(|e| DmpError::Numeric(e.to_string()))
    }
}
