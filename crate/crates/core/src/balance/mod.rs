//! Cart-table ZMP estimation, support-polygon checks and the preview
//! controller that keeps the ZMP on its reference.

mod polygon;
mod preview;
mod zmp;

pub use polygon::{inside_polygon, SupportPolygon};
pub use preview::{
    design_preview, pad_window, preview_step, CartTable, GainDump, IntegralState, PreviewController, PreviewWeights,
    DEFAULT_PREVIEW,
};
pub use zmp::{zmp_cart_table, zmp_estimate, CartTableAxis, TiltCompensation, TiltMode, GRAVITY};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BalanceError {
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("Riccati iteration did not converge: residual {residual:e} after {iterations} iterations")]
    RiccatiDivergence { iterations: usize, residual: f64 },
    #[error("closed loop is unstable (spectral radius {0})")]
    UnstableClosedLoop(f64),
    #[error("invalid support polygon: {0}")]
    Polygon(String),
}
