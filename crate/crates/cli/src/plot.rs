//! CSV figure data. Numbers use Rust's shortest round-trip formatting, so
//! the output is a deterministic function of the inputs.

use crate::suites::measure_family;
use anyhow::{bail, Result};
use kslab::contact::contact_set;
use kslab::coverings::dyadic_decomposition;
use kslab::grid::{Region, ScalarField};
use kslab::regularity::{distribution_curve, oscillation_profile, DISTRIBUTION_LEVELS};
use std::collections::BTreeMap;

pub const KINDS: &[&str] = &["decay", "contact", "covering", "distribution"];

fn num(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// Oscillation over B̄_{ρ^k r₀}(c), k ≤ depth: columns r, osc, bound. The
/// bound column is filled only when `theta` is given.
pub fn decay(u: &ScalarField, params: &BTreeMap<String, f64>) -> Result<String> {
    let c = [num(params, "cx", 0.0), num(params, "cy", 0.0), num(params, "cz", 0.0)];
    let (rho, r0) = (num(params, "rho", 0.5), num(params, "r0", 0.5));
    // by default descend while the radius stays at least 2h
    let deepest = ((r0 / (2.0 * u.grid().h())).ln() / (1.0 / rho).ln() + 1e-9).floor().max(0.0);
    let p = oscillation_profile(u, &c, rho, r0, num(params, "depth", deepest) as usize)?;
    Ok(p.to_csv(params.get("theta").copied()))
}

/// Exact contact points of the measure-estimate family on B₁: columns x, y,
/// center_x, center_y.
pub fn contact(u: &ScalarField) -> Result<String> {
    if u.grid().dim() != 2 {
        bail!("contact point clouds need a 2D field, got dim {}", u.grid().dim());
    }
    let cs = contact_set(u, &measure_family()?, &Region::ball([0.0; 3], 1.0))?;
    let mut s = String::from("x,y,center_x,center_y\n");
    for e in cs.entries.iter().filter(|e| e.exact) {
        s.push_str(&format!("{},{},{},{}\n", e.point[0], e.point[1], e.center[0], e.center[1]));
    }
    Ok(s)
}

/// Dyadic decomposition of the box (lo, hi]^dim: columns gen, cx, cy, side
/// (cy is 0 in 1D).
pub fn covering(dim: usize, params: &BTreeMap<String, f64>) -> Result<String> {
    let (lo, hi) = (num(params, "lo", 0.0), num(params, "hi", 0.5));
    let depth = num(params, "depth", [10.0, 6.0, 3.0][dim.clamp(1, 3) - 1]) as u32;
    let mut e = Region::All;
    for a in 0..dim {
        let mut n = [0.0; 3];
        n[a] = -1.0;
        let lower = Region::open_half_space(n, -lo);
        n[a] = 1.0;
        e = e.intersect(lower).intersect(Region::half_space(n, hi));
    }
    let d = dyadic_decomposition(&e, dim, depth)?;
    let mut s = String::from("gen,cx,cy,side\n");
    for q in &d.cubes {
        let c = q.center(dim);
        s.push_str(&format!("{},{},{},{}\n", q.k, c[0], c[1], q.side()));
    }
    Ok(s)
}

/// μ ↦ |{u ≥ μ}| over the grid, or over the open cube of side `side`
/// centred at 0: columns mu, measure.
pub fn distribution(u: &ScalarField, params: &BTreeMap<String, f64>) -> Result<String> {
    let g = u.grid();
    let values: Vec<f64> = match params.get("side") {
        Some(&side) => kslab::regularity::open_cube(g.dim(), side).nodes(g).iter().map(|&i| u.at(i)).collect(),
        None => u.values().to_vec(),
    };
    let levels = num(params, "levels", DISTRIBUTION_LEVELS as f64) as usize;
    Ok(distribution_curve(&values, g.cell_volume(), levels)?.to_csv())
}
