use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{run_kick, KickError, KickRig, KickScenario, SimLog, SimSummary};
use crate::par::{self, Execution};

/// Keys accepted in a grid spec.
pub const GRID_KEYS: [&str; 4] = ["speed_factor", "ball_dx", "ball_dy", "tau"];

/// Cartesian scenario grid written as `key=v1,v2;key2=v3`. `ball_dx` and
/// `ball_dy` offset the base ball position, the other keys replace values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<(String, Vec<f64>)>,
}

impl GridSpec {
    pub fn parse(spec: &str) -> Result<Self, KickError> {
        let mut axes: Vec<(String, Vec<f64>)> = Vec::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, values) =
                part.split_once('=').ok_or_else(|| KickError::Grid(format!("expected key=values, got {part:?}")))?;
            let key = key.trim();
            if !GRID_KEYS.contains(&key) {
                return Err(KickError::Grid(format!("unknown key {key:?}, expected one of {GRID_KEYS:?}")));
            }
            if axes.iter().any(|(k, _)| k == key) {
                return Err(KickError::Grid(format!("key {key:?} given twice")));
            }
            let values = values
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| KickError::Grid(format!("bad value {:?} for {key}", v.trim())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            axes.push((key.to_string(), values));
        }
        if axes.is_empty() {
            return Err(KickError::Grid("empty grid".into()));
        }
        Ok(Self { axes })
    }

    /// All combinations, the first key varying slowest.
    pub fn expand(&self, base: &KickScenario) -> Vec<(String, KickScenario)> {
        let mut out = vec![(String::new(), *base)];
        for (key, values) in &self.axes {
            let mut next = Vec::with_capacity(out.len() * values.len());
            for (label, s) in &out {
                for &v in values {
                    let mut s = *s;
                    match key.as_str() {
                        "speed_factor" => s.speed_factor = v,
                        "ball_dx" => s.ball_position[0] += v,
                        "ball_dy" => s.ball_position[1] += v,
                        "tau" => s.tau = v,
                        _ => unreachable!("keys are checked while parsing"),
                    }
                    let mut l = label.clone();
                    if !l.is_empty() {
                        l.push(',');
                    }
                    let _ = write!(l, "{key}={v}");
                    next.push((l, s));
                }
            }
            out = next;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub label: String,
    pub scenario: KickScenario,
    pub log: Result<SimLog, KickError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub label: String,
    pub scenario: KickScenario,
    pub summary: Option<SimSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub scenarios: Vec<SweepEntry>,
    pub all_stable: bool,
}

impl SweepReport {
    pub fn from_outcomes(outcomes: &[ScenarioOutcome]) -> Self {
        let scenarios: Vec<SweepEntry> = outcomes
            .iter()
            .map(|o| SweepEntry {
                label: o.label.clone(),
                scenario: o.scenario,
                summary: o.log.as_ref().ok().map(|l| l.summary),
                error: o.log.as_ref().err().map(ToString::to_string),
            })
            .collect();
        let all_stable = scenarios.iter().all(|e| e.summary.is_some_and(|s| s.stable));
        Self { scenarios, all_stable }
    }
}

/// Runs every scenario; failures are recorded per scenario and do not stop
/// the others. Output order follows input order in both execution modes.
pub fn sweep(
    scenarios: &[(String, KickScenario)],
    rig: &KickRig,
    exec: Execution,
) -> Result<Vec<ScenarioOutcome>, KickError> {
    if scenarios.is_empty() {
        return Err(KickError::Scenario("sweep needs at least one scenario".into()));
    }
    rig.validate()?;
    Ok(par::map(exec, scenarios, |(label, s)| ScenarioOutcome {
        label: label.clone(),
        scenario: *s,
        log: run_kick(s, rig),
    }))
}
