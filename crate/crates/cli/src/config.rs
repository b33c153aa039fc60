//! JSON run configuration. Every section and field is optional; unknown keys
//! are rejected. [`Config::resolve`] fills every default so the echoed
//! document reproduces the run on its own.

use std::path::{Path, PathBuf};

use kickdmp::balance::{design_preview, PreviewController, PreviewWeights, TiltCompensation, TiltMode};
use kickdmp::dmp::{imitate, LearnedPrimitive, DEFAULT_PHASE_END};
use kickdmp::kick::{BallModel, DemoShape, KickRig, KickScenario, Push, SimSettings, DEMO_DT, NOMINAL_BASES};
use kickdmp::motor::{MotorParams, DEFAULT_DELAY_CYCLES};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub dmp: DmpConfig,
    pub motor: MotorConfig,
    pub balance: BalanceConfig,
    pub sim: SimConfig,
    pub ball: BallModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DmpConfig {
    /// Execution time; the primitive's own duration when unset.
    pub tau: Option<f64>,
    pub alpha_z: Option<f64>,
    pub n_bases: Option<usize>,
    pub s_end: Option<f64>,
    /// Output sampling period of rollouts.
    pub dt: f64,
    /// Largest accepted imitation RMSE as a fraction of each axis' range.
    pub rmse_threshold: f64,
    pub weights: Option<LearnedPrimitive>,
    pub weights_file: Option<PathBuf>,
    pub start: Option<Vec<f64>>,
    pub goal: Option<Vec<f64>>,
    pub goal_velocity: Option<Vec<f64>>,
}

impl Default for DmpConfig {
    fn default() -> Self {
        Self {
            tau: None,
            alpha_z: None,
            n_bases: None,
            s_end: None,
            dt: 0.01,
            rmse_threshold: 0.01,
            weights: None,
            weights_file: None,
            start: None,
            goal: None,
            goal_velocity: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotorConfig {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub v_max: f64,
    pub delay_cycles: usize,
}

impl Default for MotorConfig {
    fn default() -> Self {
        Self { t: 0.005, d: 1.0, v_max: 6.0, delay_cycles: DEFAULT_DELAY_CYCLES }
    }
}

impl MotorConfig {
    pub fn params(&self) -> Result<MotorParams, CliError> {
        MotorParams::new(self.t, self.d, self.v_max).map_err(|e| CliError::Input(format!("motor: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BalanceConfig {
    pub dt: f64,
    pub com_height: f64,
    #[serde(rename = "Qe")]
    pub qe: f64,
    #[serde(rename = "Qx")]
    pub qx: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub n_preview: usize,
    pub tilt_mode: TiltMode,
    #[serde(rename = "P")]
    pub p: [f64; 2],
}

impl Default for BalanceConfig {
    fn default() -> Self {
        let w = PreviewWeights::default();
        let tilt = TiltCompensation::default();
        Self {
            dt: 0.01,
            com_height: 0.26,
            qe: w.qe,
            qx: w.qx,
            r: w.r,
            n_preview: kickdmp::balance::DEFAULT_PREVIEW,
            tilt_mode: tilt.mode,
            p: tilt.gain,
        }
    }
}

impl BalanceConfig {
    pub fn controller(&self) -> Result<PreviewController, CliError> {
        let w = PreviewWeights { qe: self.qe, qx: self.qx, r: self.r };
        design_preview(self.dt, self.com_height, w, self.n_preview).map_err(|e| match e {
            kickdmp::balance::BalanceError::RiccatiDivergence { .. } => CliError::NotConverged(e.to_string()),
            _ => CliError::Input(format!("balance: {e}")),
        })
    }

    pub fn tilt(&self) -> TiltCompensation {
        TiltCompensation { gain: self.p, mode: self.tilt_mode }
    }
}

/// Kick scenario plus simulation settings. Unset scenario fields fall back
/// to what the primitive was learned with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub ball_position: Option<[f64; 2]>,
    pub ball_radius: f64,
    pub kick_velocity: Option<f64>,
    pub speed_factor: f64,
    pub foot_start: Option<[f64; 3]>,
    pub contact_height: Option<f64>,
    pub push: Option<Push>,
    pub settle_time: f64,
    pub follow_through: f64,
    pub foot_mass_fraction: f64,
    pub foot_size: [f64; 2],
    pub contact_tolerance: f64,
    pub contact_phase: f64,
    pub instability_margin: f64,
    pub instability_dwell: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let s = SimSettings::default();
        Self {
            ball_position: None,
            ball_radius: KickScenario::default().ball_radius,
            kick_velocity: None,
            speed_factor: 1.0,
            foot_start: None,
            contact_height: None,
            push: None,
            settle_time: s.settle_time,
            follow_through: s.follow_through,
            foot_mass_fraction: s.foot_mass_fraction,
            foot_size: s.foot_size,
            contact_tolerance: s.contact_tolerance,
            contact_phase: s.contact_phase,
            instability_margin: s.instability_margin,
            instability_dwell: s.instability_dwell,
        }
    }
}

/// A configuration with its primitive loaded and every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: Config,
    pub primitive: LearnedPrimitive,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    /// Loads or learns the primitive and writes back every derived default.
    pub fn resolve(mut self, base_dir: Option<&Path>) -> Result<Resolved, CliError> {
        let d = &mut self.dmp;
        let primitive = match (&d.weights, &d.weights_file) {
            (Some(_), Some(_)) => {
                return Err(CliError::Input("dmp: give either weights or weights_file, not both".into()))
            }
            (Some(w), None) => w.clone(),
            (None, Some(file)) => {
                let path = match base_dir {
                    Some(dir) if file.is_relative() => dir.join(file),
                    _ => file.clone(),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Input(format!("weights_file {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Input(format!("weights_file {}: {e}", path.display())))?
            }
            (None, None) => {
                let shape = DemoShape { tau: d.tau.unwrap_or(DemoShape::default().tau), ..Default::default() };
                imitate(
                    &shape.trajectory(DEMO_DT),
                    d.n_bases.unwrap_or(NOMINAL_BASES),
                    d.alpha_z.unwrap_or(25.0),
                    d.s_end.unwrap_or(DEFAULT_PHASE_END),
                )
                .map_err(|e| CliError::Input(format!("dmp: {e}")))?
            }
        };
        for (name, given, actual) in [
            ("alpha_z", d.alpha_z, primitive.alpha_z),
            ("s_end", d.s_end, primitive.s_end),
            ("n_bases", d.n_bases.map(|n| n as f64), primitive.n_bases as f64),
        ] {
            if given.is_some_and(|g| g != actual) {
                return Err(CliError::Input(format!(
                    "dmp.{name} = {} conflicts with the weights ({actual})",
                    given.unwrap()
                )));
            }
        }
        if primitive.dims.iter().any(|dim| dim.weights.len() != primitive.n_bases) {
            return Err(CliError::Input("weights do not match n_bases".into()));
        }
        d.tau = Some(d.tau.unwrap_or(primitive.tau));
        d.alpha_z = Some(primitive.alpha_z);
        d.s_end = Some(primitive.s_end);
        d.n_bases = Some(primitive.n_bases);
        let dims = primitive.dims.len();
        d.start = Some(d.start.take().unwrap_or_else(|| primitive.dims.iter().map(|x| x.start.y).collect()));
        d.goal = Some(d.goal.take().unwrap_or_else(|| primitive.dims.iter().map(|x| x.goal).collect()));
        d.goal_velocity =
            Some(d.goal_velocity.take().unwrap_or_else(|| primitive.dims.iter().map(|x| x.goal_dot).collect()));
        for (name, v) in [("start", &d.start), ("goal", &d.goal), ("goal_velocity", &d.goal_velocity)] {
            if v.as_ref().map_or(0, Vec::len) != dims {
                return Err(CliError::Input(format!("dmp.{name} needs {dims} values")));
            }
        }
        if !(d.dt > 0.0) || !(d.rmse_threshold > 0.0) {
            return Err(CliError::Input("dmp.dt and dmp.rmse_threshold must be positive".into()));
        }

        if dims == 3 {
            let goal = self.dmp.goal.clone().unwrap_or_default();
            let gd = self.dmp.goal_velocity.clone().unwrap_or_default();
            let start = self.dmp.start.clone().unwrap_or_default();
            let s = &mut self.sim;
            s.ball_position.get_or_insert([goal[0] + s.ball_radius, goal[1]]);
            s.kick_velocity.get_or_insert(gd[0]);
            s.foot_start.get_or_insert([start[0], start[1], start[2]]);
            s.contact_height.get_or_insert(goal[2]);
        }
        Ok(Resolved { config: self, primitive })
    }
}

impl Resolved {
    pub fn tau(&self) -> f64 {
        self.config.dmp.tau.unwrap_or(self.primitive.tau)
    }

    pub fn scenario(&self) -> Result<KickScenario, CliError> {
        let s = &self.config.sim;
        let missing = || CliError::Input("kick simulations need a three-axis primitive".into());
        Ok(KickScenario {
            ball_position: s.ball_position.ok_or_else(missing)?,
            ball_radius: s.ball_radius,
            kick_velocity: s.kick_velocity.ok_or_else(missing)?,
            speed_factor: s.speed_factor,
            tau: self.tau(),
            foot_start: s.foot_start.ok_or_else(missing)?,
            contact_height: s.contact_height.ok_or_else(missing)?,
            push: s.push,
        })
    }

    pub fn rig(&self) -> Result<KickRig, CliError> {
        let c = &self.config;
        let s = &c.sim;
        Ok(KickRig {
            primitive: self.primitive.clone(),
            motor: c.motor.params()?,
            delay_cycles: c.motor.delay_cycles,
            controller: c.balance.controller()?,
            tilt: c.balance.tilt(),
            ball: c.ball,
            settings: SimSettings {
                dt: c.balance.dt,
                settle_time: s.settle_time,
                follow_through: s.follow_through,
                com_height: c.balance.com_height,
                foot_mass_fraction: s.foot_mass_fraction,
                foot_size: s.foot_size,
                contact_tolerance: s.contact_tolerance,
                contact_phase: s.contact_phase,
                instability_margin: s.instability_margin,
                instability_dwell: s.instability_dwell,
            },
        })
    }

    /// Pretty JSON of the resolved configuration.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(&self.config).expect("config serializes")
    }
}
