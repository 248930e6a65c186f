use super::region::squared_distance_to;
use super::{Grid, Point, Region, ScalarField};
use crate::error::{invalid, LabError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Regions with more nodes than this use bucketed pair sampling.
pub const EXHAUSTIVE_PAIR_LIMIT: usize = 20_000;
/// Number of log-spaced distance buckets in bucketed sampling.
pub const DISTANCE_BUCKETS: usize = 64;

/// A modulus of continuity ω(r) = C r^α.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderModulus {
    pub constant: f64,
    pub exponent: f64,
}

impl HolderModulus {
    pub fn new(constant: f64, exponent: f64) -> Result<HolderModulus> {
        if !(constant >= 0.0) || !(exponent > 0.0 && exponent <= 1.0) {
            return invalid(format!("modulus needs C >= 0 and alpha in (0,1], got {constant}, {exponent}"));
        }
        Ok(HolderModulus { constant, exponent })
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.constant * r.powf(self.exponent)
    }
}

/// Result of a norm evaluation, with the data needed to judge its resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub norm: String,
    pub region: String,
    pub value: f64,
    pub h: f64,
    pub samples: usize,
}

/// sup − inf of the field over the region's nodes.
pub fn oscillation(field: &ScalarField, region: &Region) -> Result<f64> {
    let nodes = region.nonempty_nodes(field.grid())?;
    let (lo, hi) = nodes
        .iter()
        .map(|&i| field.at(i))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(hi - lo)
}

/// Riemann-sum L^p norm with weights h^dim; `p = f64::INFINITY` gives max |u|.
///
/// Exponents in (0, 1) give the quasinorm (Σ|u|^p h^n)^{1/p}.
pub fn lp_norm(field: &ScalarField, region: &Region, p: f64) -> Result<f64> {
    Ok(lp_norm_report(field, region, p)?.value)
}

pub fn lp_norm_report(field: &ScalarField, region: &Region, p: f64) -> Result<NormReport> {
    if !(p > 0.0) {
        return invalid(format!("exponent p = {p} must be positive"));
    }
    let nodes = region.nonempty_nodes(field.grid())?;
    let value = if p.is_infinite() {
        nodes.iter().map(|&i| field.at(i).abs()).fold(0.0, f64::max)
    } else {
        let s: f64 = nodes.iter().map(|&i| field.at(i).abs().powf(p)).sum();
        (s * field.grid().cell_volume()).powf(1.0 / p)
    };
    Ok(NormReport {
        norm: format!("L^{p}"),
        region: region.describe(),
        value,
        h: field.grid().h(),
        samples: nodes.len(),
    })
}

fn ratio(du: f64, d2: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        du.abs() / d2.sqrt()
    } else {
        du.abs() / d2.powf(0.5 * alpha)
    }
}

fn exhaustive_pairs(grid: &Grid, values: &[f64], nodes: &[usize], alpha: f64) -> f64 {
    let pts: Vec<Point> = nodes.iter().map(|&i| grid.point(i)).collect();
    (0..nodes.len())
        .into_par_iter()
        .map(|a| {
            let mut best = 0.0f64;
            let ua = values[nodes[a]];
            for b in a + 1..nodes.len() {
                let d2 = super::dist2(&pts[a], &pts[b]);
                best = best.max(ratio(values[nodes[b]] - ua, d2, alpha));
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Lattice offsets used by bucketed sampling: every offset of sup-norm ≤ 3,
/// plus a fixed fan of directions at 64 log-spaced lengths up to the grid
/// diameter. Only one of ±k is kept.
pub(crate) fn bucket_offsets(grid: &Grid) -> Vec<[isize; 3]> {
    let dim = grid.dim();
    let mut set: BTreeSet<[isize; 3]> = BTreeSet::new();
    let positive = |k: &[isize; 3]| match k.iter().find(|&&c| c != 0) {
        Some(&c) => c > 0,
        None => false,
    };
    let r = |a: usize| if a < dim { -3..=3 } else { 0..=0 };
    for i in r(0) {
        for j in r(1) {
            for k in r(2) {
                let off = [i, j, k];
                if positive(&off) {
                    set.insert(off);
                }
            }
        }
    }
    let dirs: Vec<Point> = match dim {
        1 => vec![[1.0, 0.0, 0.0]],
        2 => (0..16)
            .map(|j| {
                let t = std::f64::consts::PI * j as f64 / 16.0;
                [t.cos(), t.sin(), 0.0]
            })
            .collect(),
        _ => {
            // Fibonacci points on the upper hemisphere.
            let m = 32;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|j| {
                    let z = 1.0 - (j as f64 + 0.5) / m as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let t = golden * j as f64;
                    [rho * t.cos(), rho * t.sin(), z]
                })
                .collect()
        }
    };
    let lmax = grid.diameter() / grid.h();
    if lmax > 3.0 {
        for b in 0..DISTANCE_BUCKETS {
            let len = 3.0 * (lmax / 3.0).powf(b as f64 / (DISTANCE_BUCKETS - 1) as f64);
            for d in &dirs {
                let mut off = [0isize; 3];
                for a in 0..dim {
                    off[a] = (len * d[a]).round() as isize;
                }
                if positive(&off) {
                    set.insert(off);
                } else {
                    let neg = [-off[0], -off[1], -off[2]];
                    if positive(&neg) {
                        set.insert(neg);
                    }
                }
            }
        }
    }
    set.into_iter().collect()
}

fn bucketed_pairs(grid: &Grid, values: &[f64], nodes: &[usize], alpha: f64) -> f64 {
    let mut member = vec![false; grid.len()];
    for &i in nodes {
        member[i] = true;
    }
    let offsets = bucket_offsets(grid);
    let h2 = grid.h() * grid.h();
    nodes
        .par_iter()
        .map(|&i| {
            let ijk = grid.multi(i);
            let mut best = 0.0f64;
            for off in &offsets {
                if let Some(n) = grid.shift(ijk, *off) {
                    let j = grid.index(n);
                    if member[j] {
                        let d2 = (off[0] * off[0] + off[1] * off[1] + off[2] * off[2]) as f64 * h2;
                        best = best.max(ratio(values[j] - values[i], d2, alpha));
                    }
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Hölder seminorm sup |u(y)−u(x)|/|y−x|^α over node pairs of the region.
///
/// Exhaustive below [`EXHAUSTIVE_PAIR_LIMIT`] nodes, bucketed above.
pub fn holder_seminorm(field: &ScalarField, region: &Region, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return invalid(format!("alpha = {alpha} not in (0,1]"));
    }
    let nodes = region.nodes(field.grid());
    holder_on_nodes(field, &nodes, alpha)
}

pub(crate) fn holder_on_nodes(field: &ScalarField, nodes: &[usize], alpha: f64) -> Result<f64> {
    if nodes.len() < 2 {
        return Err(LabError::InvalidParameter(format!(
            "holder seminorm needs at least 2 nodes, region has {}",
            nodes.len()
        )));
    }
    if nodes.len() <= EXHAUSTIVE_PAIR_LIMIT {
        Ok(exhaustive_pairs(field.grid(), field.values(), nodes, alpha))
    } else {
        Ok(bucketed_pairs(field.grid(), field.values(), nodes, alpha))
    }
}

/// Distance from every member node to the boundary of `domain`.
///
/// Closed-form shapes use their exact distance; other regions use the
/// distance to the nearest non-member node. The grid box counts as boundary.
pub(crate) fn boundary_distances(grid: &Grid, domain: &Region) -> Vec<Option<f64>> {
    let mask = domain.mask(grid);
    let need_numeric = (0..grid.len())
        .find(|&i| mask[i])
        .map(|i| domain.boundary_distance(&grid.point(i)).is_none())
        .unwrap_or(false);
    let numeric = if need_numeric {
        let outside: Vec<bool> = mask.iter().map(|m| !m).collect();
        Some(squared_distance_to(grid, &outside))
    } else {
        None
    };
    (0..grid.len())
        .map(|i| {
            if !mask[i] {
                return None;
            }
            let p = grid.point(i);
            let d = match (&numeric, domain.boundary_distance(&p)) {
                (Some(n), _) => n[i].sqrt(),
                (None, Some(d)) => d,
                (None, None) => f64::INFINITY,
            };
            Some(d.min(grid.box_distance(&p)))
        })
        .collect()
}

/// Interior weighted seminorm sup r^β [u]_{C^{0,α}(B_{r/2}(x₀))}.
///
/// Sample schedule: every domain node x₀, radii r = d/2^j with
/// d = dist(x₀, ∂Ω), as long as r ≥ 2h.
pub fn weighted_seminorm(field: &ScalarField, domain: &Region, alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return invalid(format!("alpha = {alpha} not in (0,1]"));
    }
    let grid = field.grid();
    let h = grid.h();
    let dists = boundary_distances(grid, domain);
    let centers: Vec<(usize, f64)> = dists
        .iter()
        .enumerate()
        .filter_map(|(i, d)| d.filter(|&d| d >= 2.0 * h).map(|d| (i, d)))
        .collect();
    if centers.is_empty() {
        return Err(LabError::InvalidParameter(
            "no interior ball of radius >= 2h fits in the domain".into(),
        ));
    }
    let best = centers
        .par_iter()
        .map(|&(i, d)| {
            let ijk = grid.multi(i);
            let mut best = 0.0f64;
            let mut r = d;
            while r >= 2.0 * h {
                let nodes: Vec<usize> = grid
                    .ball_offsets(0.5 * r)
                    .iter()
                    .filter_map(|off| grid.shift(ijk, *off).map(|n| grid.index(n)))
                    .collect();
                if nodes.len() >= 2 {
                    let s = holder_on_nodes(field, &nodes, alpha).unwrap_or(0.0);
                    best = best.max(r.powf(beta) * s);
                }
                r *= 0.5;
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}
