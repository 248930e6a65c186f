//! Ball averages with cell-fraction weights.

use crate::error::{LabError, Result};
use crate::grid::{Grid, Point, ScalarField};

/// Sub-cells per axis used to resolve cells cut by the sphere.
const SUBSAMPLES: usize = 16;

/// (node, weight) with weight the fraction of the node's cell
/// [x − h/2, x + h/2]ⁿ inside the open ball B_r(center).
pub fn ball_weights(grid: &Grid, center: &Point, r: f64) -> Result<Vec<(usize, f64)>> {
    if !grid.covers_box(center, r) {
        return Err(LabError::OutsideGrid(format!("ball of radius {r} leaves the grid")));
    }
    let n = grid.dim();
    let h = grid.h();
    let half = 0.5 * h;
    let mut out = Vec::new();
    let lo: Vec<usize> = (0..n)
        .map(|a| (((center[a] - r - grid.origin()[a]) / h).floor().max(0.0)) as usize)
        .collect();
    let hi: Vec<usize> = (0..n)
        .map(|a| ((((center[a] + r - grid.origin()[a]) / h).ceil()) as usize).min(grid.counts()[a] - 1))
        .collect();
    let range = |a: usize| if a < n { lo[a]..=hi[a] } else { 0..=0 };
    let sub = SUBSAMPLES;
    for i in range(0) {
        for j in range(1) {
            for k in range(2) {
                let x = grid.point_of([i, j, k]);
                let (mut near, mut far) = (0.0, 0.0);
                for a in 0..n {
                    let d = (x[a] - center[a]).abs();
                    near += (d - half).max(0.0).powi(2);
                    far += (d + half).powi(2);
                }
                if near >= r * r {
                    continue;
                }
                if far < r * r {
                    out.push((grid.index([i, j, k]), 1.0));
                    continue;
                }
                let mut inside = 0usize;
                let total = sub.pow(n as u32);
                for s in 0..total {
                    let mut rest = s;
                    let mut d2 = 0.0;
                    for a in 0..n {
                        let t = (rest % sub) as f64;
                        rest /= sub;
                        let y = x[a] - half + (t + 0.5) * h / sub as f64;
                        d2 += (y - center[a]).powi(2);
                    }
                    if d2 < r * r {
                        inside += 1;
                    }
                }
                if inside > 0 {
                    out.push((grid.index([i, j, k]), inside as f64 / total as f64));
                }
            }
        }
    }
    Ok(out)
}

/// ∫_{B_r} u / |B_r| with cell-fraction weights.
pub fn ball_average(field: &ScalarField, center: &Point, r: f64) -> Result<f64> {
    let w = ball_weights(field.grid(), center, r)?;
    let total: f64 = w.iter().map(|(_, w)| w).sum();
    if total == 0.0 {
        return Err(LabError::EmptyRegion);
    }
    Ok(w.iter().map(|(i, w)| w * field.at(*i)).sum::<f64>() / total)
}
