use serde::{Deserialize, Serialize};

use super::{
    Boundary, CanonicalSystem, Channel, DmpError, DmpParams, DmpSystem, ForcingTerm, MovingTarget, MultiDmp,
    StartState, Trajectory,
};

/// Bases whose summed activation over the demo falls below this are rejected.
pub const MIN_BASIS_ACTIVATION: f64 = 1e-8;

/// Learned shape of one dimension together with the boundary it was learned for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedDim {
    pub start: StartState,
    pub goal: f64,
    pub goal_dot: f64,
    pub weights: Vec<f64>,
}

/// Everything needed to rebuild the primitives of a demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedPrimitive {
    pub tau: f64,
    pub alpha_z: f64,
    pub s_end: f64,
    pub n_bases: usize,
    pub dims: Vec<LearnedDim>,
}

impl LearnedPrimitive {
    pub fn params(&self) -> DmpParams {
        DmpParams { tau: self.tau, alpha_z: self.alpha_z, s_end: self.s_end }
    }

    pub fn forcing(&self, dim: usize) -> Result<ForcingTerm, DmpError> {
        let cs = CanonicalSystem::new(self.tau, self.s_end)?;
        ForcingTerm::uniform_in_time(self.n_bases, cs.alpha_s)?.with_weights(self.dims[dim].weights.clone())
    }

    pub fn build_dim(&self, dim: usize) -> Result<DmpSystem, DmpError> {
        let d = self.dims.get(dim).ok_or_else(|| DmpError::Domain(format!("no dimension {dim}")))?;
        DmpSystem::new(self.params(), self.forcing(dim)?, d.start, d.goal, d.goal_dot)
    }

    pub fn build(&self) -> Result<MultiDmp, DmpError> {
        MultiDmp::new((0..self.dims.len()).map(|i| self.build_dim(i)).collect::<Result<_, _>>()?)
    }
}

/// Forcing values that would make the transformation system reproduce the
/// channel exactly, paired with the phase of each sample.
pub fn forcing_targets(
    times: &[f64],
    ch: &Channel,
    params: &DmpParams,
    target: &MovingTarget,
) -> Result<Vec<(f64, f64)>, DmpError> {
    let cs = CanonicalSystem::new(params.tau, params.s_end)?;
    let (tau, az, bz) = (params.tau, params.alpha_z, params.beta_z());
    let t0 = times[0];
    Ok(times
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let t = t - t0;
            let s = cs.phase_at(t);
            let (gp, gp_dot, gp_ddot) = target.eval(t);
            let (y, yd, ydd) = (ch.pos[k], ch.vel[k], ch.acc[k]);
            let f = (tau * tau * ydd - az * (bz * (gp - y) + tau * gp_dot - tau * yd) - tau * tau * gp_ddot) / s;
            (s, f)
        })
        .collect())
}

/// Locally weighted regression of one demonstrated dimension onto `n` bases.
pub fn imitate_channel(times: &[f64], ch: &Channel, params: &DmpParams, n: usize) -> Result<LearnedDim, DmpError> {
    params.validate()?;
    if ch.len() < n {
        return Err(DmpError::TooFewSamples { samples: ch.len(), bases: n });
    }
    let last = ch.len() - 1;
    let start = StartState { y: ch.pos[0], y_dot: ch.vel[0], y_ddot: ch.acc[0] };
    let (goal, goal_dot) = (ch.pos[last], ch.vel[last]);
    let target = MovingTarget::fit(
        Boundary { y0: start.y, y0_dot: start.y_dot, y0_ddot: start.y_ddot, goal, goal_dot },
        params.tau,
    )?;
    let samples = forcing_targets(times, ch, params, &target)?;
    let cs = CanonicalSystem::new(params.tau, params.s_end)?;
    let layout = ForcingTerm::uniform_in_time(n, cs.alpha_s)?;

    let mut num = vec![0.0; n];
    let mut den = vec![0.0; n];
    for (s, f) in &samples {
        for (i, psi) in layout.activations(*s).into_iter().enumerate() {
            num[i] += psi * f;
            den[i] += psi;
        }
    }
    let weights = num
        .iter()
        .zip(&den)
        .enumerate()
        .map(|(i, (a, b))| {
            if *b < MIN_BASIS_ACTIVATION {
                Err(DmpError::IllConditioned { basis: i, activation: *b })
            } else {
                Ok(a / b)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LearnedDim { start, goal, goal_dot, weights })
}

/// Learns one primitive per dimension of `demo`. The demo's duration becomes
/// tau and its final sample supplies goal position and velocity.
pub fn imitate(demo: &Trajectory, n: usize, alpha_z: f64, s_end: f64) -> Result<LearnedPrimitive, DmpError> {
    if n < 2 {
        return Err(DmpError::Domain(format!("need at least 2 bases, got {n}")));
    }
    if demo.len() < n {
        return Err(DmpError::TooFewSamples { samples: demo.len(), bases: n });
    }
    let params = DmpParams { tau: demo.duration(), alpha_z, s_end };
    let dims =
        demo.channels.iter().map(|ch| imitate_channel(&demo.times, ch, &params, n)).collect::<Result<Vec<_>, _>>()?;
    Ok(LearnedPrimitive { tau: params.tau, alpha_z, s_end, n_bases: n, dims })
}
