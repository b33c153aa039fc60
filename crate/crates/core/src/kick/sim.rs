use serde::{Deserialize, Serialize};

use super::{ball_distance, plan_kick, BallModel, KickError, KickScenario};
use crate::balance::{
    design_preview, inside_polygon, pad_window, preview_step, zmp_estimate, IntegralState, PreviewController,
    PreviewWeights, SupportPolygon, TiltCompensation, DEFAULT_PREVIEW, GRAVITY,
};
use crate::dmp::{LearnedPrimitive, MultiDmp};
use crate::motor::{MotorChain, MotorParams, DEFAULT_DELAY_CYCLES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub dt: f64,
    /// Time simulated after the primitives finish.
    pub settle_time: f64,
    /// Duration of the foot's deceleration after contact.
    pub follow_through: f64,
    pub com_height: f64,
    /// Share of the total mass carried by the kicking foot.
    pub foot_mass_fraction: f64,
    /// Support foot length (x) and width (y), centred on the origin.
    pub foot_size: [f64; 2],
    pub contact_tolerance: f64,
    pub contact_phase: f64,
    pub instability_margin: f64,
    pub instability_dwell: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt: 0.01,
            settle_time: 0.5,
            follow_through: 0.12,
            com_height: 0.26,
            foot_mass_fraction: 0.1,
            foot_size: [0.16, 0.09],
            contact_tolerance: 0.005,
            contact_phase: 0.05,
            instability_margin: 0.005,
            instability_dwell: 0.05,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<(), KickError> {
        let positive = [self.dt, self.com_height, self.foot_size[0], self.foot_size[1], self.contact_tolerance];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(KickError::Scenario(format!("settings need positive sizes and periods: {self:?}")));
        }
        if !(self.foot_mass_fraction >= 0.0 && self.foot_mass_fraction < 1.0) {
            return Err(KickError::Scenario("foot_mass_fraction must lie in [0, 1)".into()));
        }
        if !(self.follow_through >= 0.0)
            || !(self.settle_time >= 0.0)
            || !(self.instability_margin >= 0.0)
            || !(self.instability_dwell >= 0.0)
        {
            return Err(KickError::Scenario("settle time, margin and dwell must be non-negative".into()));
        }
        Ok(())
    }

    pub fn support_polygon(&self) -> Result<SupportPolygon, KickError> {
        Ok(SupportPolygon::rectangle([0.0, 0.0], self.foot_size[0], self.foot_size[1])?)
    }
}

/// Everything shared by the kicks of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct KickRig {
    pub primitive: LearnedPrimitive,
    /// Motor model of every task-space axis, in metres.
    pub motor: MotorParams,
    pub delay_cycles: usize,
    pub controller: PreviewController,
    pub tilt: TiltCompensation,
    pub ball: BallModel,
    pub settings: SimSettings,
}

impl KickRig {
    /// Built-in kick, a fast motor model and the default balance weights.
    pub fn standard(primitive: LearnedPrimitive) -> Result<Self, KickError> {
        let settings = SimSettings::default();
        let controller = design_preview(settings.dt, settings.com_height, PreviewWeights::default(), DEFAULT_PREVIEW)?;
        Ok(Self {
            primitive,
            motor: MotorParams::new(0.005, 1.0, 6.0)?,
            delay_cycles: DEFAULT_DELAY_CYCLES,
            controller,
            tilt: TiltCompensation::default(),
            ball: BallModel::default(),
            settings,
        })
    }

    pub fn validate(&self) -> Result<(), KickError> {
        self.settings.validate()?;
        self.motor.validate()?;
        self.ball.validate()?;
        let plant = self.controller.plant();
        if (plant.dt - self.settings.dt).abs() > 1e-12 || (plant.c_z - self.settings.com_height).abs() > 1e-12 {
            return Err(KickError::Scenario(format!(
                "controller designed for dt={}, c_z={} but the simulation uses dt={}, c_z={}",
                plant.dt, plant.c_z, self.settings.dt, self.settings.com_height
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub time: f64,
    pub velocity: [f64; 3],
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub contact_time: Option<f64>,
    pub contact_speed: Option<f64>,
    pub terminal_error: f64,
    pub zmp_max_excursion: f64,
    pub ball_distance: Option<f64>,
    pub stable: bool,
}

/// Per-cycle record of one simulated kick on the 100 Hz time base.
#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub times: Vec<f64>,
    pub foot_setpoint: Vec<[f64; 3]>,
    pub foot_model: Vec<[f64; 3]>,
    pub body_setpoint: Vec<[f64; 2]>,
    pub body_model: Vec<[f64; 2]>,
    pub com: Vec<[f64; 2]>,
    pub zmp: Vec<[f64; 2]>,
    pub zmp_ref: Vec<[f64; 2]>,
    pub inside: Vec<bool>,
    pub goal: [f64; 3],
    pub contact: Option<Contact>,
    /// Time at which the ZMP had been outside the polygon for too long.
    pub unstable_at: Option<f64>,
    pub summary: SimSummary,
}

impl SimLog {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn check_stable(&self) -> Result<(), KickError> {
        match self.unstable_at {
            Some(t) => Err(KickError::Unstable { t }),
            None => Ok(()),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Commanded foot state at one control cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Setpoint {
    pos: [f64; 3],
    vel: [f64; 3],
    acc: [f64; 3],
    phase: f64,
}

/// Samples the planned primitives on the control grid up to `tau`, then
/// brings each axis to rest with a smooth velocity decay over `follow`.
fn foot_plan(mut dmp: MultiDmp, n: usize, dt: f64, follow: f64) -> Result<Vec<Setpoint>, KickError> {
    let tau = dmp.tau();
    let full_steps = (tau / dt + 1e-9).floor() as usize;
    let sample = |d: &MultiDmp| -> Result<Setpoint, KickError> {
        let mut sp = Setpoint { pos: [0.0; 3], vel: [0.0; 3], acc: [0.0; 3], phase: d.phase() };
        for (i, sys) in d.dims().iter().enumerate() {
            sp.pos[i] = sys.position();
            sp.vel[i] = sys.velocity();
            sp.acc[i] = sys.acceleration()?;
        }
        Ok(sp)
    };
    let mut plan = Vec::with_capacity(n);
    for k in 0..n.min(full_steps + 1) {
        if k > 0 {
            dmp.step(dt)?;
        }
        plan.push(sample(&dmp)?);
    }
    let remainder = tau - full_steps as f64 * dt;
    if remainder > 1e-12 {
        dmp.step(remainder)?;
    }
    let end = sample(&dmp)?;
    for k in plan.len()..n {
        let s = k as f64 * dt - tau;
        let mut sp = Setpoint { acc: [0.0; 3], ..end };
        for i in 0..3 {
            let v = end.vel[i];
            if follow > 0.0 && s < follow {
                let r = s / follow;
                sp.pos[i] = end.pos[i] + v * follow * (r - r.powi(3) + r.powi(4) / 2.0);
                sp.vel[i] = v * (1.0 - 3.0 * r * r + 2.0 * r.powi(3));
                sp.acc[i] = v * (-6.0 * r + 6.0 * r * r) / follow;
            } else {
                sp.pos[i] = end.pos[i] + v * follow / 2.0;
                sp.vel[i] = 0.0;
            }
        }
        plan.push(sp);
    }
    Ok(plan)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Smallest distance from `p` to the polyline through `path`.
fn closest_approach(path: &[[f64; 3]], p: [f64; 3]) -> f64 {
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut best = path.first().map_or(f64::INFINITY, |a| norm(&sub(*a, p)));
    for w in path.windows(2) {
        let d = sub(w[1], w[0]);
        let len2 = dot(d, d);
        let r = if len2 > 0.0 { (dot(sub(p, w[0]), d) / len2).clamp(0.0, 1.0) } else { 0.0 };
        let q = [w[0][0] + r * d[0], w[0][1] + r * d[1], w[0][2] + r * d[2]];
        best = best.min(norm(&sub(q, p)));
    }
    best
}

/// Runs one kick from standing to `tau + settle_time`.
///
/// Each cycle issues the planned foot position and the controller's body
/// position to delayed motor models and estimates the ZMP from the modelled
/// positions and accelerations. The total ZMP reference stays at the support
/// foot centre; the body cart tracks whatever offsets the planned foot, so
/// the controller previews the foot's effect fifty cycles ahead.
pub fn run_kick(scenario: &KickScenario, rig: &KickRig) -> Result<SimLog, KickError> {
    rig.validate()?;
    let st = &rig.settings;
    let dt = st.dt;
    let mu = st.foot_mass_fraction;
    let k_zmp = st.com_height / GRAVITY;
    let dmp = plan_kick(scenario, &rig.primitive)?;
    let goal = scenario.contact_point();
    let tau = dmp.tau();
    let n = ((tau + st.settle_time) / dt).round() as usize + 1;
    let plan = foot_plan(dmp, n, dt, st.follow_through)?;

    let poly = st.support_polygon()?;
    let ctrl = &rig.controller;
    let plant = ctrl.plant();
    let zmp_ref = [0.0, 0.0];
    let body_ref: [Vec<f64>; 2] = std::array::from_fn(|a| {
        plan.iter().map(|sp| (zmp_ref[a] - mu * (sp.pos[a] - k_zmp * sp.acc[a])) / (1.0 - mu)).collect()
    });

    let foot0 = plan[0].pos;
    let body0 = [body_ref[0][0], body_ref[1][0]];
    let mut foot_chain: Vec<MotorChain> =
        foot0.iter().map(|&y| MotorChain::at_rest(rig.motor, rig.delay_cycles, y)).collect();
    let mut body_chain: Vec<MotorChain> =
        body0.iter().map(|&y| MotorChain::at_rest(rig.motor, rig.delay_cycles, y)).collect();
    let mut cart = [[body0[0], 0.0, 0.0], [body0[1], 0.0, 0.0]];
    let mut integral = body0.map(|b| IntegralState::at_rest(ctrl, b));

    let mut log = SimLog {
        times: Vec::with_capacity(n),
        foot_setpoint: Vec::with_capacity(n),
        foot_model: Vec::with_capacity(n),
        body_setpoint: Vec::with_capacity(n),
        body_model: Vec::with_capacity(n),
        com: Vec::with_capacity(n),
        zmp: Vec::with_capacity(n),
        zmp_ref: Vec::with_capacity(n),
        inside: Vec::with_capacity(n),
        goal,
        contact: None,
        unstable_at: None,
        summary: SimSummary {
            contact_time: None,
            contact_speed: None,
            terminal_error: 0.0,
            zmp_max_excursion: 0.0,
            ball_distance: None,
            stable: true,
        },
    };
    let mut outside_cycles = 0usize;

    for (k, sp) in plan.iter().enumerate() {
        let t = k as f64 * dt;
        if log.contact.is_none() && norm(&sub(sp.pos, goal)) <= st.contact_tolerance && sp.phase < st.contact_phase {
            log.contact = Some(Contact { time: t, velocity: sp.vel, speed: norm(&sp.vel) });
        }
        let body_set = [cart[0][0], cart[1][0]];

        let mut foot_pos = [0.0; 3];
        let mut foot_acc = [0.0; 3];
        for (i, chain) in foot_chain.iter_mut().enumerate() {
            let v0 = chain.state.y_dot;
            foot_pos[i] = chain.command(sp.pos[i]);
            foot_acc[i] = (chain.state.y_dot - v0) / dt;
        }
        let mut body_pos = [0.0; 2];
        let mut body_acc = [0.0; 2];
        for (i, chain) in body_chain.iter_mut().enumerate() {
            let v0 = chain.state.y_dot;
            body_pos[i] = chain.command(body_set[i]);
            body_acc[i] = (chain.state.y_dot - v0) / dt;
        }

        let com: [f64; 2] = std::array::from_fn(|a| (1.0 - mu) * body_pos[a] + mu * foot_pos[a]);
        let model_acc: [f64; 2] = std::array::from_fn(|a| (1.0 - mu) * body_acc[a] + mu * foot_acc[a]);
        let mut torso_acc = model_acc;
        if let Some(p) = scenario.push {
            if t >= p.start && t < p.start + p.duration {
                torso_acc[0] += p.accel[0];
                torso_acc[1] += p.accel[1];
            }
        }
        let com3 = [com[0], com[1], st.com_height];
        let zmp = zmp_estimate(com3, [0.0, 0.0], torso_acc, &rig.tilt);
        let expected = zmp_estimate(com3, [0.0, 0.0], model_acc, &rig.tilt);

        let inside = inside_polygon(zmp, &poly, 0.0);
        if poly.signed_distance(zmp) < -st.instability_margin {
            outside_cycles += 1;
            if log.unstable_at.is_none() && outside_cycles as f64 * dt > st.instability_dwell + 1e-12 {
                log.unstable_at = Some(t);
            }
        } else {
            outside_cycles = 0;
        }

        // The modelled chain only reproduces the commands late; the integral
        // sees the undelayed cart ZMP plus whatever the estimate adds on top
        // of the motor model.
        for a in 0..2 {
            let measured = plant.zmp(cart[a]) + (zmp[a] - expected[a]) / (1.0 - mu);
            let window = pad_window(&body_ref[a], k, ctrl.n_preview());
            let u = preview_step(ctrl, &mut integral[a], &cart[a], body_ref[a][k], &window, measured)?;
            cart[a] = plant.step(cart[a], u);
        }

        log.times.push(t);
        log.foot_setpoint.push(sp.pos);
        log.foot_model.push(foot_pos);
        log.body_setpoint.push(body_set);
        log.body_model.push(body_pos);
        log.com.push(com);
        log.zmp.push(zmp);
        log.zmp_ref.push(zmp_ref);
        log.inside.push(inside);
    }

    log.summary = SimSummary {
        contact_time: log.contact.map(|c| c.time),
        contact_speed: log.contact.map(|c| c.speed),
        terminal_error: closest_approach(&log.foot_model, goal),
        zmp_max_excursion: log
            .zmp
            .iter()
            .zip(&log.zmp_ref)
            .map(|(z, r)| norm(&[z[0] - r[0], z[1] - r[1]]))
            .fold(0.0, f64::max),
        ball_distance: log.contact.map(|c| ball_distance(c.speed, &rig.ball)).transpose()?,
        stable: log.unstable_at.is_none(),
    };
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmp::LearnedDim;
    use crate::kick::nominal_primitive;

    fn rig() -> KickRig {
        static RIG: std::sync::OnceLock<KickRig> = std::sync::OnceLock::new();
        RIG.get_or_init(|| KickRig::standard(nominal_primitive()).unwrap()).clone()
    }

    #[test]
    fn standing_still_keeps_zmp_on_reference() {
        let start = [-0.10, 0.10, 0.0];
        let still = LearnedPrimitive {
            tau: 1.0,
            alpha_z: 25.0,
            s_end: 0.01,
            n_bases: 10,
            dims: start
                .iter()
                .map(|&y| LearnedDim {
                    start: crate::dmp::StartState { y, y_dot: 0.0, y_ddot: 0.0 },
                    goal: y,
                    goal_dot: 0.0,
                    weights: vec![0.0; 10],
                })
                .collect(),
        };
        let scenario = KickScenario::nominal_for(&still, 0.0325).unwrap();
        let log = run_kick(&scenario, &KickRig { primitive: still, ..rig() }).unwrap();
        assert!(log.zmp.iter().all(|z| z[0].abs() < 1e-3 && z[1].abs() < 1e-3));
        assert!(log.summary.stable);
    }

    #[test]
    fn nominal_kick_is_stable_and_accurate() {
        let log = run_kick(&KickScenario::default(), &rig()).unwrap();
        assert!(log.inside.iter().all(|&b| b), "max excursion {}", log.summary.zmp_max_excursion);
        assert!(log.summary.stable);
        assert!(log.summary.terminal_error < 5e-3, "{}", log.summary.terminal_error);
        let c = log.contact.expect("contact");
        assert!((c.speed - 2.2).abs() < 0.05, "{c:?}");
        assert_eq!(log.len(), 151);
    }

    #[test]
    fn deterministic() {
        let s = KickScenario { speed_factor: 0.75, ..Default::default() };
        assert_eq!(run_kick(&s, &rig()).unwrap(), run_kick(&s, &rig()).unwrap());
    }

    #[test]
    fn rejects_mismatched_controller() {
        let mut r = rig();
        r.settings.dt = 0.02;
        assert!(run_kick(&KickScenario::default(), &r).is_err());
    }
}
