use super::{Grid, ScalarField};
use crate::error::{invalid, Result};
use rayon::prelude::*;

/// Dyadic radii h, 2h, 4h, ... below the grid diameter, plus the diameter.
pub(crate) fn dyadic_radii(grid: &Grid) -> Vec<f64> {
    let diam = grid.diameter();
    let mut radii = Vec::new();
    let mut r = grid.h();
    while r < diam {
        radii.push(r);
        r *= 2.0;
    }
    radii.push(diam);
    radii
}

/// Row segments (outer offset, half-width along the last axis) making up
/// the open ball of radius r in lattice units.
fn ball_rows(dim: usize, r_units: f64) -> Vec<([isize; 2], isize)> {
    let m = r_units.ceil() as isize;
    let r2 = r_units * r_units;
    let outer = |used: bool| if used { -m..=m } else { 0..=0 };
    let mut rows = Vec::new();
    for i in outer(dim >= 3) {
        for j in outer(dim >= 2) {
            let rest = r2 - (i * i + j * j) as f64;
            if rest <= 0.0 {
                continue;
            }
            // largest k with k² < rest
            let mut w = rest.sqrt().floor() as isize;
            while (w * w) as f64 >= rest {
                w -= 1;
            }
            if w >= 0 {
                rows.push(([i, j], w));
            }
        }
    }
    rows
}

/// Hardy–Littlewood maximal function over dyadic radii.
///
/// At each node: the largest average of |u|^power (power defaults to 1)
/// over B_r(x) ∩ grid for r ∈ {h, 2h, 4h, ..., diam}.
pub fn hardy_littlewood_maximal(field: &ScalarField, power: Option<f64>) -> Result<ScalarField> {
    let p = power.unwrap_or(1.0);
    if !(p > 0.0 && p.is_finite()) {
        return invalid(format!("power {p} must be positive"));
    }
    let grid = field.grid();
    let dim = grid.dim();
    let line = grid.counts()[dim - 1];
    let nlines = grid.len() / line;
    let data: Vec<f64> = field.values().iter().map(|v| v.abs().powf(p)).collect();
    // prefix sums along the contiguous last axis
    let mut prefix = vec![0.0; nlines * (line + 1)];
    for l in 0..nlines {
        for k in 0..line {
            prefix[l * (line + 1) + k + 1] = prefix[l * (line + 1) + k] + data[l * line + k];
        }
    }
    let counts = grid.counts().to_vec();
    let outer_counts: [usize; 2] = match dim {
        1 => [1, 1],
        2 => [1, counts[0]],
        _ => [counts[0], counts[1]],
    };
    let radii = dyadic_radii(grid);
    let row_sets: Vec<_> = radii.iter().map(|r| ball_rows(dim, r / grid.h())).collect();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let l = idx / line;
            let k = (idx % line) as isize;
            let (oi, oj) = (l / outer_counts[1], l % outer_counts[1]);
            let mut best = 0.0f64;
            for rows in &row_sets {
                let mut sum = 0.0;
                let mut n = 0usize;
                for ([di, dj], w) in rows {
                    let ni = oi as isize + di;
                    let nj = oj as isize + dj;
                    if ni < 0 || nj < 0 || ni >= outer_counts[0] as isize || nj >= outer_counts[1] as isize {
                        continue;
                    }
                    let nl = ni as usize * outer_counts[1] + nj as usize;
                    let lo = (k - w).max(0) as usize;
                    let hi = ((k + w) as usize).min(line - 1);
                    sum += prefix[nl * (line + 1) + hi + 1] - prefix[nl * (line + 1) + lo];
                    n += hi + 1 - lo;
                }
                if n > 0 {
                    best = best.max(sum / n as f64);
                }
            }
            best
        })
        .collect();
    ScalarField::new(grid.clone(), values)
}
