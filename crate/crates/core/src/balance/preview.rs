use nalgebra::{Matrix3, Matrix4, RowVector3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use super::{BalanceError, GRAVITY};

/// Number of future ZMP references the controller looks at.
pub const DEFAULT_PREVIEW: usize = 50;

const RICCATI_TARGET: f64 = 1e-10;
const RICCATI_ACCEPT: f64 = 1e-8;
const RICCATI_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreviewWeights {
    /// Weight on the integrated ZMP error.
    #[serde(rename = "Qe")]
    pub qe: f64,
    /// Weight on state increments.
    #[serde(rename = "Qx")]
    pub qx: f64,
    /// Weight on the jerk input.
    #[serde(rename = "R")]
    pub r: f64,
}

impl Default for PreviewWeights {
    fn default() -> Self {
        Self { qe: 1.0, qx: 0.0, r: 1e-6 }
    }
}

/// Zero-order-hold discretization of the cart-table triple integrator.
/// State is `(c, c_dot, c_ddot)`, input is jerk, output is the ZMP.
#[derive(Debug, Clone, PartialEq)]
pub struct CartTable {
    pub dt: f64,
    pub c_z: f64,
    pub a: Matrix3<f64>,
    pub b: Vector3<f64>,
    pub c: RowVector3<f64>,
}

impl CartTable {
    pub fn new(dt: f64, c_z: f64) -> Result<Self, BalanceError> {
        if !(dt > 0.0 && dt.is_finite()) || !(c_z > 0.0 && c_z.is_finite()) {
            return Err(BalanceError::Domain(format!("need dt > 0 and c_z > 0, got dt={dt}, c_z={c_z}")));
        }
        Ok(Self {
            dt,
            c_z,
            a: Matrix3::new(1.0, dt, dt * dt / 2.0, 0.0, 1.0, dt, 0.0, 0.0, 1.0),
            b: Vector3::new(dt.powi(3) / 6.0, dt * dt / 2.0, dt),
            c: RowVector3::new(1.0, 0.0, -c_z / GRAVITY),
        })
    }

    pub fn step(&self, x: [f64; 3], jerk: f64) -> [f64; 3] {
        let next = self.a * Vector3::from(x) + self.b * jerk;
        [next[0], next[1], next[2]]
    }

    pub fn zmp(&self, x: [f64; 3]) -> f64 {
        (self.c * Vector3::from(x))[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreviewController {
    plant: CartTable,
    weights: PreviewWeights,
    gi: f64,
    gx: [f64; 3],
    gd: Vec<f64>,
    riccati_iterations: usize,
    riccati_residual: f64,
    spectral_radius: f64,
}

/// Serialized controller gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainDump {
    pub dt: f64,
    pub c_z: f64,
    #[serde(rename = "Qe")]
    pub qe: f64,
    #[serde(rename = "Qx")]
    pub qx: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "Gi")]
    pub gi: f64,
    #[serde(rename = "Gx")]
    pub gx: Vec<f64>,
    #[serde(rename = "Gd")]
    pub gd: Vec<f64>,
}

/// Builds the integral-action preview controller: augments the plant with
/// the summed ZMP error, solves the discrete Riccati equation by fixed-point
/// iteration and derives integral, state and preview gains.
pub fn design_preview(
    dt: f64,
    c_z: f64,
    weights: PreviewWeights,
    n_preview: usize,
) -> Result<PreviewController, BalanceError> {
    let plant = CartTable::new(dt, c_z)?;
    if !(weights.r > 0.0) || !(weights.qe >= 0.0) || !(weights.qx >= 0.0) || !weights.r.is_finite() {
        return Err(BalanceError::Domain(format!("need R > 0 and Qe, Qx >= 0, got {weights:?}")));
    }
    if n_preview == 0 {
        return Err(BalanceError::Domain("preview horizon must be at least 1".into()));
    }

    let ca = plant.c * plant.a;
    let cb = (plant.c * plant.b)[0];
    let mut at = Matrix4::zeros();
    at[(0, 0)] = 1.0;
    for j in 0..3 {
        at[(0, j + 1)] = ca[j];
        for i in 0..3 {
            at[(i + 1, j + 1)] = plant.a[(i, j)];
        }
    }
    let bt = Vector4::new(cb, plant.b[0], plant.b[1], plant.b[2]);
    let q = Matrix4::from_diagonal(&Vector4::new(weights.qe, weights.qx, weights.qx, weights.qx));
    let r = weights.r;

    let riccati_rhs = |p: &Matrix4<f64>| {
        let pb = p * bt;
        let denom = r + bt.dot(&pb);
        let bpa = pb.transpose() * at;
        q + at.transpose() * p * at - bpa.transpose() * bpa / denom
    };
    let mut p = q;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < RICCATI_MAX_ITER {
        let next = riccati_rhs(&p);
        iterations += 1;
        residual = (next - p).norm();
        p = next;
        if !residual.is_finite() {
            break;
        }
        if residual < RICCATI_TARGET {
            break;
        }
    }
    if !(residual < RICCATI_ACCEPT) {
        return Err(BalanceError::RiccatiDivergence { iterations, residual });
    }
    residual = (riccati_rhs(&p) - p).norm();

    let pb = p * bt;
    let denom = r + bt.dot(&pb);
    let k_row = pb.transpose() / denom;
    let gi = (k_row * Vector4::x())[0];
    let gx_row = k_row * at.fixed_view::<4, 3>(0, 1);
    let gx = [gx_row[0], gx_row[1], gx_row[2]];

    let ac = at - bt * (k_row * at);
    let spectral_radius = ac.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(spectral_radius < 1.0) {
        return Err(BalanceError::UnstableClosedLoop(spectral_radius));
    }

    let mut gd = Vec::with_capacity(n_preview);
    gd.push(-gi);
    let mut x = -(ac.transpose() * p * Vector4::x());
    for _ in 1..n_preview {
        gd.push(bt.dot(&x) / denom);
        x = ac.transpose() * x;
    }

    Ok(PreviewController {
        plant,
        weights,
        gi,
        gx,
        gd,
        riccati_iterations: iterations,
        riccati_residual: residual,
        spectral_radius,
    })
}

impl PreviewController {
    pub fn plant(&self) -> &CartTable {
        &self.plant
    }

    pub fn weights(&self) -> PreviewWeights {
        self.weights
    }

    pub fn n_preview(&self) -> usize {
        self.gd.len()
    }

    pub fn gi(&self) -> f64 {
        self.gi
    }

    pub fn gx(&self) -> [f64; 3] {
        self.gx
    }

    pub fn gd(&self) -> &[f64] {
        &self.gd
    }

    pub fn riccati_iterations(&self) -> usize {
        self.riccati_iterations
    }

    pub fn riccati_residual(&self) -> f64 {
        self.riccati_residual
    }

    /// Largest closed-loop pole magnitude of the augmented system.
    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    /// Jerk command for a given error sum, plant state and a full window of
    /// future references `r(k+1) ..= r(k+N)`. Linear in all inputs.
    pub fn control(&self, error_sum: f64, x: &[f64; 3], window: &[f64]) -> f64 {
        debug_assert_eq!(window.len(), self.gd.len());
        let state: f64 = self.gx.iter().zip(x).map(|(g, v)| g * v).sum();
        let preview: f64 = self.gd.iter().zip(window).map(|(g, r)| g * r).sum();
        -self.gi * error_sum - state - preview
    }

    pub fn gain_dump(&self) -> GainDump {
        GainDump {
            dt: self.plant.dt,
            c_z: self.plant.c_z,
            qe: self.weights.qe,
            qx: self.weights.qx,
            r: self.weights.r,
            gi: self.gi,
            gx: self.gx.to_vec(),
            gd: self.gd.clone(),
        }
    }
}

/// Running sum of ZMP tracking errors; one per controlled axis.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegralState {
    pub error_sum: f64,
}

impl IntegralState {
    /// Error sum that holds a cart resting at `position` with every
    /// reference equal to it, so a controller can start away from the origin
    /// without a transient.
    pub fn at_rest(ctrl: &PreviewController, position: f64) -> Self {
        let preview: f64 = ctrl.gd.iter().sum();
        Self { error_sum: -(ctrl.gx[0] + preview) * position / ctrl.gi }
    }
}

/// `plan[start + 1 ..= start + n]`, repeating the final entry past the end.
pub fn pad_window(plan: &[f64], start: usize, n: usize) -> Vec<f64> {
    let Some(&last) = plan.last() else {
        return vec![0.0; n];
    };
    (1..=n).map(|j| plan.get(start + j).copied().unwrap_or(last)).collect()
}

/// One control cycle: accumulates `zmp_measured - zmp_ref` and returns the
/// jerk command. A window shorter than the horizon is padded with its last
/// entry (or `zmp_ref` if empty).
pub fn preview_step(
    ctrl: &PreviewController,
    integral: &mut IntegralState,
    x: &[f64; 3],
    zmp_ref: f64,
    window: &[f64],
    zmp_measured: f64,
) -> Result<f64, BalanceError> {
    let n = ctrl.n_preview();
    if window.len() > n {
        return Err(BalanceError::Domain(format!("window of {} exceeds the horizon of {n}", window.len())));
    }
    integral.error_sum += zmp_measured - zmp_ref;
    if window.len() == n {
        return Ok(ctrl.control(integral.error_sum, x, window));
    }
    let fill = window.last().copied().unwrap_or(zmp_ref);
    let mut padded = window.to_vec();
    padded.resize(n, fill);
    Ok(ctrl.control(integral.error_sum, x, &padded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_ctrl() -> PreviewController {
        static CTRL: std::sync::OnceLock<PreviewController> = std::sync::OnceLock::new();
        CTRL.get_or_init(|| design_preview(0.01, 0.26, PreviewWeights::default(), DEFAULT_PREVIEW).unwrap()).clone()
    }

    /// Closed loop against the ideal plant; returns (ZMP, COM) per cycle.
    fn simulate(ctrl: &PreviewController, plan: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let plant = ctrl.plant();
        let mut x = [0.0; 3];
        let mut integral = IntegralState::default();
        let (mut zmp, mut com) = (Vec::new(), Vec::new());
        for k in 0..plan.len() {
            let p = plant.zmp(x);
            zmp.push(p);
            com.push(x[0]);
            let w = pad_window(plan, k, ctrl.n_preview());
            let u = preview_step(ctrl, &mut integral, &x, plan[k], &w, p).unwrap();
            x = plant.step(x, u);
        }
        (zmp, com)
    }

    #[test]
    fn discretization_matches_exact_integration() {
        let plant = CartTable::new(0.01, 0.26).unwrap();
        let (x0, v0, a0, j) = (0.1, -0.3, 2.0, 7.0);
        let x = plant.step([x0, v0, a0], j);
        let t: f64 = 0.01;
        assert!((x[0] - (x0 + v0 * t + a0 * t * t / 2.0 + j * t.powi(3) / 6.0)).abs() < 1e-15);
        assert!((x[1] - (v0 + a0 * t + j * t * t / 2.0)).abs() < 1e-15);
        assert!((x[2] - (a0 + j * t)).abs() < 1e-15);
    }

    #[test]
    fn gains_have_expected_shape() {
        let c = default_ctrl();
        assert_eq!(c.gd().len(), 50);
        assert!(c.riccati_residual() < 1e-8);
        assert!(c.spectral_radius() < 1.0);
        assert_eq!(c.gd()[0], -c.gi());
        let peak = (0..50).max_by(|&a, &b| c.gd()[a].abs().total_cmp(&c.gd()[b].abs())).unwrap();
        assert!(peak < 20);
        for k in peak + 1..50 {
            assert!(c.gd()[k].abs() <= c.gd()[k - 1].abs(), "k={k}");
        }
    }

    #[test]
    fn closed_loop_decays_oracle() {
        // Gelfand: ||Ac^k||^(1/k) tends to the spectral radius.
        let c = default_ctrl();
        let plant = c.plant();
        let mut ac = Matrix4::zeros();
        for col in 0..4 {
            let mut e = [0.0; 4];
            e[col] = 1.0;
            let x = [e[1], e[2], e[3]];
            let u = -c.gi() * e[0] - c.gx().iter().zip(&x).map(|(g, v)| g * v).sum::<f64>();
            let xn = plant.step(x, u);
            let en = e[0] + plant.zmp(xn) - 0.0;
            ac.set_column(col, &Vector4::new(en, xn[0], xn[1], xn[2]));
        }
        let k = 2000;
        let norm = ac.pow(k as u32).norm();
        assert!(norm.powf(1.0 / k as f64) < 1.0);
        assert!((norm.powf(1.0 / k as f64) - c.spectral_radius()).abs() < 0.01);
    }

    #[test]
    fn design_is_deterministic() {
        let fresh = || design_preview(0.01, 0.26, PreviewWeights::default(), DEFAULT_PREVIEW).unwrap();
        assert_eq!(fresh().gain_dump(), fresh().gain_dump());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(design_preview(0.0, 0.26, PreviewWeights::default(), 50).is_err());
        assert!(design_preview(0.01, 0.26, PreviewWeights { r: 0.0, ..Default::default() }, 50).is_err());
        assert!(design_preview(0.01, 0.26, PreviewWeights::default(), 0).is_err());
        assert!(matches!(
            design_preview(0.01, 0.26, PreviewWeights { qe: 0.0, qx: 0.0, r: 1.0 }, 10),
            Err(BalanceError::RiccatiDivergence { .. }) | Err(BalanceError::UnstableClosedLoop(_))
        ));
    }

    #[test]
    fn equilibrium_gives_zero_command() {
        let c = default_ctrl();
        let mut i = IntegralState::default();
        assert_eq!(preview_step(&c, &mut i, &[0.0; 3], 0.0, &[0.0; 50], 0.0).unwrap(), 0.0);
    }

    #[test]
    fn short_windows_are_padded() {
        let c = default_ctrl();
        let x = [0.01, 0.02, -0.1];
        let (mut a, mut b) = (IntegralState::default(), IntegralState::default());
        let short = preview_step(&c, &mut a, &x, 0.0, &[0.01, 0.02], 0.003).unwrap();
        let mut full = vec![0.02; 50];
        full[0] = 0.01;
        assert_eq!(short, preview_step(&c, &mut b, &x, 0.0, &full, 0.003).unwrap());
        assert!(preview_step(&c, &mut a, &x, 0.0, &[0.0; 51], 0.0).is_err());
        assert_eq!(pad_window(&[1.0, 2.0, 3.0], 1, 4), vec![3.0; 4]);
    }

    #[test]
    fn tracks_step_with_anticipation() {
        let c = default_ctrl();
        let step_at = 100;
        let plan: Vec<f64> = (0..500).map(|k| if k < step_at { 0.0 } else { 0.02 }).collect();
        let (zmp, com) = simulate(&c, &plan);
        assert!((zmp[499] - 0.02).abs() < 1e-4);
        assert!((com[499] - 0.02).abs() < 1e-4);
        let peak = zmp.iter().copied().fold(f64::MIN, f64::max);
        assert!(peak < 0.02 * 1.2, "overshoot {peak}");
        assert!(com[step_at - 1] > 1e-6);
    }

    #[test]
    fn resting_start_stays_put() {
        let c = default_ctrl();
        let x = [0.03, 0.0, 0.0];
        let mut i = IntegralState::at_rest(&c, 0.03);
        let u = preview_step(&c, &mut i, &x, 0.03, &[0.03; 50], 0.03).unwrap();
        assert!(u.abs() < 1e-9, "{u}");
    }

    #[test]
    fn constant_offset_converges() {
        let c = default_ctrl();
        let (zmp, com) = simulate(&c, &[-0.015; 400]);
        assert!((zmp[399] + 0.015).abs() < 1e-6);
        assert!((com[399] + 0.015).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn control_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0,
                             e1 in -0.1f64..0.1, e2 in -0.1f64..0.1,
                             x1 in proptest::array::uniform3(-0.1f64..0.1), x2 in proptest::array::uniform3(-0.1f64..0.1),
                             w1 in proptest::collection::vec(-0.05f64..0.05, 50), w2 in proptest::collection::vec(-0.05f64..0.05, 50)) {
            let c = default_ctrl();
            let mix = |p: f64, q: f64| a * p + b * q;
            let x: [f64; 3] = std::array::from_fn(|i| mix(x1[i], x2[i]));
            let w: Vec<f64> = w1.iter().zip(&w2).map(|(p, q)| mix(*p, *q)).collect();
            let lhs = c.control(mix(e1, e2), &x, &w);
            let rhs = a * c.control(e1, &x1, &w1) + b * c.control(e2, &x2, &w2);
            let scale = c.gi() + c.gx().iter().map(|g| g.abs()).sum::<f64>() + c.gd().iter().map(|g| g.abs()).sum::<f64>();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }
}
