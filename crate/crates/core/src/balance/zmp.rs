use serde::{Deserialize, Serialize};

pub const GRAVITY: f64 = 9.81;

/// One horizontal axis of the cart-table model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartTableAxis {
    pub c: f64,
    pub c_dot: f64,
    pub c_ddot: f64,
}

/// ZMP of a cart at height `c_z` on a massless table.
pub fn zmp_cart_table(x: &CartTableAxis, y: &CartTableAxis, c_z: f64) -> [f64; 2] {
    debug_assert!(c_z > 0.0);
    let k = c_z / GRAVITY;
    [x.c - k * x.c_ddot, y.c - k * y.c_ddot]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiltMode {
    /// `c + P * dtheta`: reduces to the plain cart-table ZMP without tilt.
    #[default]
    Additive,
    /// `(P * dtheta) * c`, componentwise.
    Multiplicative,
}

/// Correction for a torso that tilts over a foot edge without moving the
/// modelled COM.
///
/// Torso orientation is `(pitch, roll)` in radians, pitch positive when
/// leaning backward and roll positive when leaning to the left. The
/// difference is expected minus measured, so with the default gains a torso
/// that leans further back than the model predicts pulls the estimate back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiltCompensation {
    #[serde(rename = "P")]
    pub gain: [f64; 2],
    pub mode: TiltMode,
}

impl Default for TiltCompensation {
    fn default() -> Self {
        Self { gain: [30.0, -30.0], mode: TiltMode::Additive }
    }
}

impl TiltCompensation {
    pub fn delta_theta(expected: [f64; 2], measured: [f64; 2]) -> [f64; 2] {
        [expected[0] - measured[0], expected[1] - measured[1]]
    }

    pub fn apply(&self, com: [f64; 2], delta_theta: [f64; 2]) -> [f64; 2] {
        let p = self.gain;
        match self.mode {
            TiltMode::Additive => [com[0] + p[0] * delta_theta[0], com[1] + p[1] * delta_theta[1]],
            TiltMode::Multiplicative => [p[0] * delta_theta[0] * com[0], p[1] * delta_theta[1] * com[1]],
        }
    }
}

/// ZMP estimate from the motor-model COM `(c_x, c_y, c_z)`, the tilt
/// difference and the torso acceleration.
pub fn zmp_estimate(com: [f64; 3], delta_theta: [f64; 2], torso_accel: [f64; 2], tilt: &TiltCompensation) -> [f64; 2] {
    debug_assert!(com[2] > 0.0);
    let k = com[2] / GRAVITY;
    let c = tilt.apply([com[0], com[1]], delta_theta);
    [c[0] - k * torso_accel[0], c[1] - k * torso_accel[1]]
}
