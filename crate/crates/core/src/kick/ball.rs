use serde::{Deserialize, Serialize};

use super::KickError;

/// Ball that leaves the foot at `k_r` times the foot speed and decelerates
/// uniformly while rolling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BallModel {
    pub k_r: f64,
    pub a_roll: f64,
}

impl Default for BallModel {
    fn default() -> Self {
        Self { k_r: 0.8, a_roll: 0.35 }
    }
}

impl BallModel {
    pub fn validate(&self) -> Result<(), KickError> {
        if !(self.k_r > 0.0 && self.k_r <= 1.0) || !(self.a_roll > 0.0 && self.a_roll.is_finite()) {
            return Err(KickError::Scenario(format!("need k_r in (0, 1] and a_roll > 0, got {self:?}")));
        }
        Ok(())
    }
}

/// Rolling distance `(k_r v)^2 / (2 a_roll)`.
pub fn ball_distance(contact_velocity: f64, ball: &BallModel) -> Result<f64, KickError> {
    ball.validate()?;
    if !(contact_velocity >= 0.0) || !contact_velocity.is_finite() {
        return Err(KickError::Scenario(format!("contact velocity must be >= 0, got {contact_velocity}")));
    }
    Ok((ball.k_r * contact_velocity).powi(2) / (2.0 * ball.a_roll))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_law() {
        let b = BallModel::default();
        assert_eq!(ball_distance(0.0, &b).unwrap(), 0.0);
        let full = ball_distance(2.2, &b).unwrap();
        assert!((full - 4.425142857142857).abs() < 1e-12);
        assert!((ball_distance(1.1, &b).unwrap() - full / 4.0).abs() < 1e-12);
        assert!(ball_distance(-1.0, &b).is_err());
        assert!(ball_distance(1.0, &BallModel { k_r: 1.5, a_roll: 0.35 }).is_err());
    }
}
