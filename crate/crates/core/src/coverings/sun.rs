use crate::error::{invalid, Result};
use crate::grid::ScalarField;
use crate::report::CheckReport;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SunRising {
    /// Shade flag per grid node (endpoints are never in (0,1) and stay false).
    pub shade: Vec<bool>,
    pub shade_measure: f64,
    pub osc: f64,
    /// Σ of positive increments between consecutive interior nodes.
    pub positive_variation: f64,
    /// {forward slope > m} ⊆ S^m
    pub slope_inclusion: bool,
    /// lhs = |S^m|, rhs = osc/m, tolerance 2h
    pub report: CheckReport,
    /// lhs = |S^m|, rhs = (positive variation)/m, tolerance 2h
    pub variation_report: CheckReport,
}

/// A^m = {x : u(x) − mx ≥ max over nodes y > x of (u(y) − my)}, S^m its
/// complement among the interior nodes of a 1D grid.
pub fn sun_rising(field: &ScalarField, m: f64) -> Result<SunRising> {
    let g = field.grid();
    if g.dim() != 1 {
        return invalid("sun rising needs a 1D field");
    }
    if !(m > 0.0) || !m.is_finite() {
        return invalid(format!("slope m must be positive, got {m}"));
    }
    let len = g.len();
    let h = g.h();
    let v: Vec<f64> = (0..len).map(|i| field.at(i) - m * g.point(i)[0]).collect();
    let mut shade = vec![false; len];
    let mut best = f64::NEG_INFINITY;
    for i in (1..len - 1).rev() {
        shade[i] = v[i] < best;
        best = best.max(v[i]);
    }
    let shade_measure = shade.iter().filter(|&&s| s).count() as f64 * h;
    let interior = &field.values()[1..len - 1];
    let osc = interior.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - interior.iter().cloned().fold(f64::INFINITY, f64::min);
    let positive_variation: f64 = interior.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum();
    let slope_inclusion = (1..len.saturating_sub(2)).all(|i| (field.at(i + 1) - field.at(i)) / h <= m || shade[i]);
    let report = CheckReport::new("sun_rising", shade_measure, osc / m, 2.0 * h, g);
    let variation_report = CheckReport::new("sun_rising_variation", shade_measure, positive_variation / m, 2.0 * h, g);
    Ok(SunRising { shade, shade_measure, osc, positive_variation, slope_inclusion, report, variation_report })
}
