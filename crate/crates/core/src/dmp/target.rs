use serde::{Deserialize, Serialize};

use super::DmpError;

/// Boundary conditions of the moving target. The terminal acceleration is
/// always zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub y0: f64,
    pub y0_dot: f64,
    pub y0_ddot: f64,
    pub goal: f64,
    pub goal_dot: f64,
}

/// Quintic `g_p(t) = sum b_i (t - t_start)^i` tracked by the transformation system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingTarget {
    pub coeffs: [f64; 6],
    pub t_start: f64,
    pub duration: f64,
    pub boundary: Boundary,
}

impl MovingTarget {
    /// Solves the six boundary conditions over `[0, tau]`.
    pub fn fit(boundary: Boundary, tau: f64) -> Result<Self, DmpError> {
        Self::fit_from(boundary, 0.0, tau)
    }

    /// Solves the boundary conditions over `[t_start, t_start + duration]`.
    pub fn fit_from(boundary: Boundary, t_start: f64, duration: f64) -> Result<Self, DmpError> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(DmpError::Domain(format!("moving target needs a positive duration, got {duration}")));
        }
        let Boundary { y0, y0_dot, y0_ddot, goal, goal_dot } = boundary;
        let d = duration;
        let b0 = y0;
        let b1 = y0_dot;
        let b2 = 0.5 * y0_ddot;
        let h = goal - (b0 + b1 * d + b2 * d * d);
        let hv = goal_dot - (b1 + 2.0 * b2 * d);
        let ha = -2.0 * b2;
        let b3 = (20.0 * h - 8.0 * hv * d + ha * d * d) / (2.0 * d.powi(3));
        let b4 = (-30.0 * h + 14.0 * hv * d - 2.0 * ha * d * d) / (2.0 * d.powi(4));
        let b5 = (12.0 * h - 6.0 * hv * d + ha * d * d) / (2.0 * d.powi(5));
        Ok(Self { coeffs: [b0, b1, b2, b3, b4, b5], t_start, duration: d, boundary })
    }

    pub fn end_time(&self) -> f64 {
        self.t_start + self.duration
    }

    /// Position, velocity and acceleration of the target at absolute time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let x = t - self.t_start;
        let b = &self.coeffs;
        let p = b[0] + x * (b[1] + x * (b[2] + x * (b[3] + x * (b[4] + x * b[5]))));
        let v = b[1] + x * (2.0 * b[2] + x * (3.0 * b[3] + x * (4.0 * b[4] + x * 5.0 * b[5])));
        let a = 2.0 * b[2] + x * (6.0 * b[3] + x * (12.0 * b[4] + x * 20.0 * b[5]));
        (p, v, a)
    }

    /// Largest violation of the six boundary conditions.
    pub fn boundary_residual(&self) -> f64 {
        let (p0, v0, a0) = self.eval(self.t_start);
        let (p1, v1, a1) = self.eval(self.end_time());
        let bd = &self.boundary;
        [p0 - bd.y0, v0 - bd.y0_dot, a0 - bd.y0_ddot, p1 - bd.goal, v1 - bd.goal_dot, a1]
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()))
    }
}
