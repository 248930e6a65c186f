use crate::error::{invalid, LabError, Result};
use crate::grid::{norm, squared_distance_to, Grid, Point, Region};
use crate::report::CheckReport;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const RHO0: f64 = 1.0 / 6.0;
pub const RHO1: f64 = 1.0 / 7.0;

/// The ball B_{r/4}(x₂) built from x₀ ∈ B_{ρ₁} ∖ F.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MidpointBall {
    pub x0: Point,
    /// r(x₀) = 2·dist(x₀, F)
    pub r: f64,
    pub x1: Point,
    pub x2: Point,
    pub radius: f64,
    /// B_{r/4}(x₂) ⊆ B_{r/2}(x₀) ∩ B_{ρ₁}
    pub contained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InkSpots {
    pub report: CheckReport,
    pub hypothesis_holds: bool,
    pub sampled_balls: usize,
    pub hypothesis_violations: usize,
    /// Smallest E-density seen among balls where the hypothesis applies.
    pub worst_density: f64,
    pub midpoint_balls: Vec<MidpointBall>,
    pub schedule: String,
}

/// Growing ink-spots on node sets. The hypothesis is checked on every ball
/// B_r(x₀) ⊆ B₁ with x₀ a node and r = 2^{−j} such that ρ₀r ≥ 2h.
pub fn ink_spots_check(e: &Region, f: &Region, eta: f64, grid: &Grid) -> Result<InkSpots> {
    if !(eta > 0.0 && eta < 1.0) {
        return invalid(format!("eta = {eta} not in (0,1)"));
    }
    let n = grid.dim();
    let h = grid.h();
    let fmask = f.mask(grid);
    let emask = e.mask(grid);
    let near_origin = Region::closed_ball([0.0; 3], RHO1).nodes(grid);
    if !near_origin.iter().any(|&i| fmask[i]) {
        return Err(LabError::Hypothesis("F must meet the closed ball of radius 1/7".into()));
    }
    let d2 = squared_distance_to(grid, &fmask);
    let dist = |i: usize| d2[i].sqrt();
    let mut radii = Vec::new();
    let mut r = 1.0f64;
    while RHO0 * r >= 2.0 * h {
        radii.push(r);
        r *= 0.5;
    }
    let centers = Region::ball([0.0; 3], 1.0).nodes(grid);
    let offsets: Vec<Vec<[isize; 3]>> = radii.iter().map(|r| grid.ball_offsets(RHO0 * r)).collect();
    let (sampled, violations, worst) = centers
        .par_iter()
        .map(|&c| {
            let x = grid.point(c);
            let ijk = grid.multi(c);
            let mut sampled = 0usize;
            let mut bad = 0usize;
            let mut worst = f64::INFINITY;
            for (r, offs) in radii.iter().zip(&offsets) {
                if norm(&x) + r > 1.0 {
                    continue;
                }
                sampled += 1;
                if dist(c) > r / 2.0 {
                    continue;
                }
                let (mut inside, mut total) = (0usize, 0usize);
                for off in offs {
                    if let Some(m) = grid.shift(ijk, *off) {
                        total += 1;
                        if emask[grid.index(m)] {
                            inside += 1;
                        }
                    }
                }
                let density = inside as f64 / total.max(1) as f64;
                worst = worst.min(density);
                if density < eta {
                    bad += 1;
                }
            }
            (sampled, bad, worst)
        })
        .reduce(|| (0, 0, f64::INFINITY), |a, b| (a.0 + b.0, a.1 + b.1, a.2.min(b.2)));
    let inner = Region::ball([0.0; 3], RHO1).nodes(grid);
    let cell = grid.cell_volume();
    let outside_f: Vec<usize> = inner.iter().cloned().filter(|&i| !fmask[i]).collect();
    let lhs_base = outside_f.len() as f64 * cell;
    let rhs = inner.iter().filter(|&&i| emask[i] && !fmask[i]).count() as f64 * cell;
    let factor = 5f64.powi(-(n as i32)) * eta;
    let hypothesis_holds = violations == 0;
    let lhs = if hypothesis_holds { factor * lhs_base } else { 0.0 };
    let mut report = CheckReport::new("ink_spots", lhs, rhs, 0.0, grid);
    if !hypothesis_holds {
        report.note(format!("hypothesis fails on {violations} sampled balls; conclusion not asserted"));
    }
    report.note(format!("|B_rho1 \\ F| = {lhs_base:e}"));
    let midpoint_balls = outside_f
        .iter()
        .map(|&i| {
            let x0 = grid.point(i);
            let r = 2.0 * dist(i);
            let len = norm(&x0);
            let x1 = if len == 0.0 {
                [0.0; 3]
            } else {
                let s = 1.0 - 0.5 * r / len;
                [x0[0] * s, x0[1] * s, x0[2] * s]
            };
            let x2 = [0.5 * (x0[0] + x1[0]), 0.5 * (x0[1] + x1[1]), 0.5 * (x0[2] + x1[2])];
            let radius = r / 4.0;
            let slack = 1e-12;
            let d02 = crate::grid::dist2(&x0, &x2).sqrt();
            let contained = d02 + radius <= r / 2.0 + slack && norm(&x2) + radius <= RHO1 + slack;
            MidpointBall { x0, r, x1, x2, radius, contained }
        })
        .collect();
    Ok(InkSpots {
        report,
        hypothesis_holds,
        sampled_balls: sampled,
        hypothesis_violations: violations,
        worst_density: worst,
        midpoint_balls,
        schedule: format!("grid nodes of B_1 x radii {radii:?}"),
    })
}
