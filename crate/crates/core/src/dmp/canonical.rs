use serde::{Deserialize, Serialize};

use super::DmpError;

/// Phase value the canonical system reaches at `t = tau` unless configured otherwise.
pub const DEFAULT_PHASE_END: f64 = 0.01;

/// Convergence rate that makes the phase hit `s_end` exactly at `t = tau`.
///
/// The execution time cancels out of `exp(-alpha_s * t / tau)` at `t = tau`,
/// so the result only depends on `s_end`. `tau` is still validated because a
/// non-positive duration is never meaningful.
pub fn derive_alpha_s(tau: f64, s_end: f64) -> Result<f64, DmpError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(DmpError::Domain(format!("tau must be positive, got {tau}")));
    }
    if !(s_end > 0.0 && s_end < 1.0) {
        return Err(DmpError::Domain(format!("terminal phase must lie in (0, 1), got {s_end}")));
    }
    Ok(-s_end.ln())
}

/// First-order phase system `tau * ds/dt = -alpha_s * s`, evaluated in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSystem {
    pub tau: f64,
    pub alpha_s: f64,
    pub s_end: f64,
}

impl CanonicalSystem {
    pub fn new(tau: f64, s_end: f64) -> Result<Self, DmpError> {
        let alpha_s = derive_alpha_s(tau, s_end)?;
        Ok(Self { tau, alpha_s, s_end })
    }

    pub fn phase_at(&self, t: f64) -> f64 {
        phase_at(self, t)
    }

    /// Time at which the phase reaches `s`.
    pub fn time_of_phase(&self, s: f64) -> f64 {
        -s.ln() * self.tau / self.alpha_s
    }

    /// Same phase curve stretched to a new execution time.
    pub fn retimed(&self, tau: f64) -> Result<Self, DmpError> {
        Self::new(tau, self.s_end)
    }
}

pub fn phase_at(cs: &CanonicalSystem, t: f64) -> f64 {
    (-cs.alpha_s * t / cs.tau).exp()
}
