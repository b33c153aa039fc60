use serde::{Deserialize, Serialize};

use super::DmpError;

/// Activation at which neighbouring bases cross halfway between their centers.
pub const NEIGHBOUR_ACTIVATION: f64 = 0.55;

/// Normalised mixture of Gaussian radial basis functions over the phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingTerm {
    weights: Vec<f64>,
    centers: Vec<f64>,
    widths: Vec<f64>,
}

impl ForcingTerm {
    pub fn new(weights: Vec<f64>, centers: Vec<f64>, widths: Vec<f64>) -> Result<Self, DmpError> {
        let n = weights.len();
        if n < 2 {
            return Err(DmpError::Domain(format!("need at least 2 bases, got {n}")));
        }
        if centers.len() != n || widths.len() != n {
            return Err(DmpError::Domain(format!(
                "basis arrays disagree: {} weights, {} centers, {} widths",
                n,
                centers.len(),
                widths.len()
            )));
        }
        if let Some(w) = widths.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(DmpError::Domain(format!("basis width must be positive, got {w}")));
        }
        if centers.iter().any(|c| !(*c > 0.0 && *c <= 1.0)) {
            return Err(DmpError::Domain("basis centers must lie in (0, 1]".into()));
        }
        if centers.windows(2).any(|p| p[1] >= p[0]) {
            return Err(DmpError::Domain("basis centers must be strictly decreasing".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(DmpError::Domain("weights must be finite".into()));
        }
        Ok(Self { weights, centers, widths })
    }

    /// Zero-weight bases whose centers sit at equally spaced times of a
    /// canonical system with rate `alpha_s`.
    pub fn uniform_in_time(n: usize, alpha_s: f64) -> Result<Self, DmpError> {
        if n < 2 {
            return Err(DmpError::Domain(format!("need at least 2 bases, got {n}")));
        }
        let centers: Vec<f64> = (0..n).map(|i| (-alpha_s * i as f64 / (n - 1) as f64).exp()).collect();
        let spread = 8.0 * (1.0 / NEIGHBOUR_ACTIVATION).ln();
        let mut widths: Vec<f64> = centers.windows(2).map(|p| (p[0] - p[1]).powi(2) / spread).collect();
        widths.push(widths[n - 2]);
        Self::new(vec![0.0; n], centers, widths)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self, DmpError> {
        if weights.len() != self.weights.len() {
            return Err(DmpError::Domain(format!("expected {} weights, got {}", self.weights.len(), weights.len())));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(DmpError::Domain("weights must be finite".into()));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    fn exponent(&self, i: usize, s: f64) -> f64 {
        -(s - self.centers[i]).powi(2) / (2.0 * self.widths[i])
    }

    /// Raw (unnormalised) activation of every basis at phase `s`.
    pub fn activations(&self, s: f64) -> Vec<f64> {
        (0..self.len()).map(|i| self.exponent(i, s).exp()).collect()
    }

    /// Evaluates `sum(psi_i * w_i) / sum(psi_i)`.
    ///
    /// Exponents are shifted by their maximum before exponentiation, so the
    /// denominator is at least one and never underflows, however far `s` sits
    /// from every center.
    pub fn eval(&self, s: f64) -> Result<f64, DmpError> {
        if !s.is_finite() {
            return Err(DmpError::Numeric(format!("forcing term evaluated at phase {s}")));
        }
        let top = (0..self.len()).map(|i| self.exponent(i, s)).fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for (i, w) in self.weights.iter().enumerate() {
            let psi = (self.exponent(i, s) - top).exp();
            num += psi * w;
            den += psi;
        }
        let f = num / den;
        if !f.is_finite() {
            return Err(DmpError::Numeric(format!("forcing term is not finite at phase {s}")));
        }
        Ok(f)
    }
}
