use serde::{Deserialize, Serialize};

use super::{DemoShape, KickError};
use crate::dmp::{DmpSystem, LearnedPrimitive, MultiDmp, StartState};

/// Offsets smaller than this leave the learned boundary untouched.
const SAME: f64 = 1e-12;

/// Torso acceleration disturbance seen by the ZMP estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Push {
    pub start: f64,
    pub duration: f64,
    /// Extra torso acceleration (m/s^2) while the push lasts.
    pub accel: [f64; 2],
}

/// One kick request. Positions are relative to the support foot centre,
/// the kick points along +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KickScenario {
    pub ball_position: [f64; 2],
    pub ball_radius: f64,
    /// Foot speed at contact for `speed_factor = 1`.
    pub kick_velocity: f64,
    pub speed_factor: f64,
    pub tau: f64,
    pub foot_start: [f64; 3],
    pub contact_height: f64,
    pub push: Option<Push>,
}

impl Default for KickScenario {
    fn default() -> Self {
        let d = DemoShape::default();
        let c = d.contact_point();
        let radius = 0.0325;
        Self {
            ball_position: [c[0] + radius, c[1]],
            ball_radius: radius,
            kick_velocity: d.contact_speed,
            speed_factor: 1.0,
            tau: d.tau,
            foot_start: d.start,
            contact_height: d.contact_height,
            push: None,
        }
    }
}

impl KickScenario {
    /// Scenario that asks for exactly what `primitive` was learned with.
    pub fn nominal_for(primitive: &LearnedPrimitive, ball_radius: f64) -> Result<Self, KickError> {
        let [x, y, z] = axes(primitive)?;
        Ok(Self {
            ball_position: [x.goal + ball_radius, y.goal],
            ball_radius,
            kick_velocity: x.goal_dot,
            speed_factor: 1.0,
            tau: primitive.tau,
            foot_start: [x.start.y, y.start.y, z.start.y],
            contact_height: z.goal,
            push: None,
        })
    }

    pub fn validate(&self) -> Result<(), KickError> {
        let finite =
            self.ball_position.iter().chain(&self.foot_start).all(|v| v.is_finite()) && self.contact_height.is_finite();
        if !finite {
            return Err(KickError::Scenario("non-finite position".into()));
        }
        if !(self.speed_factor > 0.0 && self.speed_factor <= 1.0) {
            return Err(KickError::Scenario(format!("speed_factor must lie in (0, 1], got {}", self.speed_factor)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(KickError::Scenario(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.kick_velocity >= 0.0 && self.kick_velocity.is_finite()) || !(self.ball_radius >= 0.0) {
            return Err(KickError::Scenario("kick_velocity and ball_radius must be non-negative".into()));
        }
        if let Some(p) = self.push {
            if !(p.duration >= 0.0) || !p.start.is_finite() || p.accel.iter().any(|a| !a.is_finite()) {
                return Err(KickError::Scenario(format!("invalid push {p:?}")));
            }
        }
        Ok(())
    }

    /// Foot position at contact.
    pub fn contact_point(&self) -> [f64; 3] {
        [self.ball_position[0] - self.ball_radius, self.ball_position[1], self.contact_height]
    }

    pub fn contact_velocity(&self) -> [f64; 3] {
        [self.kick_velocity * self.speed_factor, 0.0, 0.0]
    }
}

fn axes(primitive: &LearnedPrimitive) -> Result<[&crate::dmp::LearnedDim; 3], KickError> {
    match primitive.dims.as_slice() {
        [x, y, z] => Ok([x, y, z]),
        d => Err(KickError::Scenario(format!("kick primitives need 3 axes, got {}", d.len()))),
    }
}

/// Adapts the learned foot primitives to `scenario`: new start, duration,
/// contact point and contact velocity. Velocity changes rescale the forcing
/// term of the affected axis.
pub fn plan_kick(scenario: &KickScenario, primitive: &LearnedPrimitive) -> Result<MultiDmp, KickError> {
    scenario.validate()?;
    let learned = axes(primitive)?;
    let params = primitive.params();
    let mut dims = Vec::with_capacity(3);
    for (i, d) in learned.iter().enumerate() {
        let mut start = d.start;
        if (scenario.foot_start[i] - start.y).abs() > SAME {
            start = StartState { y: scenario.foot_start[i], ..start };
        }
        dims.push(DmpSystem::new(params, primitive.forcing(i)?, start, d.goal, d.goal_dot)?);
    }
    let mut plan = MultiDmp::new(dims)?;
    if (scenario.tau - primitive.tau).abs() > SAME {
        plan = plan.with_tau(scenario.tau)?;
    }
    let goal = scenario.contact_point();
    let goal_dot = scenario.contact_velocity();
    for (i, dim) in plan.dims_mut().iter_mut().enumerate() {
        if (goal[i] - dim.goal()).abs() > SAME {
            dim.set_goal(goal[i])?;
        }
        if (goal_dot[i] - dim.goal_dot()).abs() > SAME {
            dim.set_goal_velocity(goal_dot[i])?;
        }
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kick::nominal_primitive;

    #[test]
    fn nominal_scenario_reproduces_imitation() {
        let p = nominal_primitive();
        let s = KickScenario::nominal_for(&p, 0.0325).unwrap();
        let planned = plan_kick(&s, &p).unwrap().rollout(0.01).unwrap();
        assert_eq!(planned, p.build().unwrap().rollout(0.01).unwrap());
        let builtin = plan_kick(&KickScenario::default(), &p).unwrap().rollout(0.01).unwrap();
        assert_eq!(builtin, planned);
    }

    #[test]
    fn ball_moved_forward() {
        let p = nominal_primitive();
        let mut s = KickScenario::default();
        s.ball_position[0] += 0.08;
        let r = plan_kick(&s, &p).unwrap().rollout(0.001).unwrap();
        let end = r.channels[0].pos[r.len() - 1];
        assert!((end - s.contact_point()[0]).abs() < 1e-3, "{end}");
        assert!((s.contact_point()[0] - KickScenario::default().contact_point()[0] - 0.08).abs() < 1e-12);
    }

    #[test]
    fn half_speed_contact() {
        let p = nominal_primitive();
        let full = KickScenario::default();
        let half = KickScenario { speed_factor: 0.5, ..full };
        let v = |s: &KickScenario| {
            let r = plan_kick(s, &p).unwrap().rollout(0.001).unwrap();
            r.channels[0].vel[r.len() - 1]
        };
        let ratio = v(&half) / v(&full);
        assert!((ratio - 0.5).abs() < 0.02 * 0.5, "{ratio}");
    }

    #[test]
    fn invalid_scenarios() {
        let p = nominal_primitive();
        for s in [
            KickScenario { speed_factor: 0.0, ..Default::default() },
            KickScenario { speed_factor: 1.5, ..Default::default() },
            KickScenario { tau: -1.0, ..Default::default() },
            KickScenario { ball_position: [f64::NAN, 0.0], ..Default::default() },
        ] {
            assert!(matches!(plan_kick(&s, &p), Err(KickError::Scenario(_))));
        }
    }
}
