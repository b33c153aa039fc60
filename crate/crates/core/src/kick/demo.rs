use std::f64::consts::PI;

use crate::dmp::{imitate, Channel, LearnedPrimitive, Trajectory, DEFAULT_PHASE_END};

/// Shape of the built-in demonstration: the foot swings back, lifts, and
/// accelerates forward so it meets the ball at full speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoShape {
    pub tau: f64,
    pub start: [f64; 3],
    /// Forward travel from start to contact.
    pub reach: f64,
    pub contact_speed: f64,
    pub contact_height: f64,
    pub lift: f64,
    /// Fraction of `tau` after which the forward stroke begins.
    pub stroke_start: f64,
    /// Fraction of `tau` over which the backswing lasts.
    pub backswing_end: f64,
}

impl Default for DemoShape {
    fn default() -> Self {
        Self {
            tau: 1.0,
            start: [-0.10, 0.10, 0.0],
            reach: 0.15,
            contact_speed: 2.2,
            contact_height: 0.025,
            lift: 0.03,
            stroke_start: 0.75,
            backswing_end: 0.6,
        }
    }
}

fn smootherstep(u: f64) -> (f64, f64, f64, f64) {
    let u = u.clamp(0.0, 1.0);
    let integral = u.powi(6) - 3.0 * u.powi(5) + 2.5 * u.powi(4);
    let value = 6.0 * u.powi(5) - 15.0 * u.powi(4) + 10.0 * u.powi(3);
    let d1 = 30.0 * u.powi(4) - 60.0 * u.powi(3) + 30.0 * u * u;
    let d2 = 120.0 * u.powi(3) - 180.0 * u * u + 60.0 * u;
    (integral, value, d1, d2)
}

impl DemoShape {
    /// Backswing velocity amplitude that makes the stroke end at `reach`.
    pub fn backswing_speed(&self) -> f64 {
        let stroke = self.contact_speed * (1.0 - self.stroke_start) * self.tau / 2.0;
        (stroke - self.reach) / (self.backswing_end * self.tau / 2.0)
    }

    /// Position, velocity and acceleration per axis at time `t`.
    pub fn sample(&self, t: f64) -> [[f64; 3]; 3] {
        let tau = self.tau;
        let [x0, y0, z0] = self.start;

        let t0 = self.stroke_start * tau;
        let len = tau - t0;
        let (si, sv, sd1, _) = smootherstep((t - t0) / len);
        let v = self.contact_speed;
        let (mut x, mut xd, mut xdd) = (x0 + v * len * si, v * sv, v * sd1 / len);
        let t1 = self.backswing_end * tau;
        if t < t1 {
            let w = PI / t1;
            let b = self.backswing_speed();
            x -= b * (t / 2.0 - (2.0 * w * t).sin() / (4.0 * w));
            xd -= b * (w * t).sin().powi(2);
            xdd -= b * w * (2.0 * w * t).sin();
        } else {
            x -= self.backswing_speed() * t1 / 2.0;
        }

        let u = t / tau;
        let (_, zs, zd1, zd2) = smootherstep(u);
        let dz = self.contact_height - z0;
        let w = PI / tau;
        // Angle from the nearer end so the lift vanishes exactly at both.
        let (r, sign) = if 2.0 * t < tau { (w * t, 1.0) } else { (w * (tau - t), -1.0) };
        let z = z0 + dz * zs + self.lift * r.sin().powi(2);
        let zd = dz * zd1 / tau + sign * self.lift * w * (2.0 * r).sin();
        let zdd = dz * zd2 / (tau * tau) + 2.0 * self.lift * w * w * (2.0 * r).cos();

        [[x, xd, xdd], [y0, 0.0, 0.0], [z, zd, zdd]]
    }

    pub fn contact_point(&self) -> [f64; 3] {
        [self.start[0] + self.reach, self.start[1], self.contact_height]
    }

    /// Sampled demonstration over `[0, tau]`.
    pub fn trajectory(&self, dt: f64) -> Trajectory {
        let n = (self.tau / dt).round() as usize + 1;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let mut chans = vec![Channel::with_capacity(n); 3];
        for &t in &times {
            for (ch, [p, v, a]) in chans.iter_mut().zip(self.sample(t)) {
                ch.push(p, v, a);
            }
        }
        Trajectory::new(dt, times, chans).expect("uniform grid")
    }
}

/// Bases used for the built-in kick.
pub const NOMINAL_BASES: usize = 30;
/// Sampling period of the built-in demonstration.
pub const DEMO_DT: f64 = 1e-3;

/// The built-in kick learned from [`DemoShape::default`].
pub fn nominal_primitive() -> LearnedPrimitive {
    imitate(&DemoShape::default().trajectory(DEMO_DT), NOMINAL_BASES, 25.0, DEFAULT_PHASE_END)
        .expect("built-in demonstration is well formed")
}
