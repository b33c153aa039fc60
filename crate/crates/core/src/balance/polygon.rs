use serde::{Deserialize, Serialize};

use super::BalanceError;

/// Convex support region in the ground plane, vertices counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPolygon {
    vertices: Vec<[f64; 2]>,
}

impl SupportPolygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self, BalanceError> {
        let n = vertices.len();
        if n < 3 {
            return Err(BalanceError::Polygon(format!("needs at least 3 vertices, got {n}")));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(BalanceError::Polygon("non-finite vertex".into()));
        }
        let mut area2 = 0.0;
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            let turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if turn < 0.0 {
                return Err(BalanceError::Polygon("vertices are not convex and counterclockwise".into()));
            }
            area2 += a[0] * b[1] - b[0] * a[1];
        }
        if !(area2 > 0.0) {
            return Err(BalanceError::Polygon("empty interior".into()));
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle of `length` along x and `width` along y.
    pub fn rectangle(center: [f64; 2], length: f64, width: f64) -> Result<Self, BalanceError> {
        let (hx, hy) = (length / 2.0, width / 2.0);
        let [cx, cy] = center;
        Self::new(vec![[cx - hx, cy - hy], [cx + hx, cy - hy], [cx + hx, cy + hy], [cx - hx, cy + hy]])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Distance to the nearest edge line, positive inside.
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                (ex * (p[1] - a[1]) - ey * (p[0] - a[0])) / ex.hypot(ey)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// True when `p` keeps at least `margin` from every edge; points on the
/// boundary count as inside for a zero margin.
pub fn inside_polygon(p: [f64; 2], poly: &SupportPolygon, margin: f64) -> bool {
    poly.signed_distance(p) >= margin - 1e-12
}
