//! Checks built on the mean value property of the Laplacian.

use super::averages::{ball_average, ball_weights};
use crate::error::{invalid, LabError, Result};
use crate::grid::{
    dist2, holder_seminorm, lp_norm, norm, oscillation, unit_ball_volume, Point, Region, ScalarField,
};
use crate::operators::{gradient_at, laplacian_at, pucci_plus, hessian_at, Ellipticity};
use crate::report::{CheckReport, EstimateConstants};

/// Mean-value constant: avg_{B₁} u ≤ u(0) + C ‖(Δu)₊‖_{L^p(B₁)},
/// C = |B₁|^{−1/p} / ((2 − n/p)(n + 2 − n/p)).
pub fn mean_value_constant(n: usize, p: f64) -> Result<f64> {
    let nf = n as f64;
    if !(p > nf / 2.0) {
        return invalid(format!("supercritical exponent required: p = {p} <= n/2 = {}", nf / 2.0));
    }
    let s = 2.0 - nf / p;
    Ok(unit_ball_volume(n).powf(-1.0 / p) / (s * (nf + 2.0 - nf / p)))
}

/// ‖g(Δu)‖_{L^p} over the nodes of `region`; g picks the positive or negative part.
fn laplacian_part_norm(field: &ScalarField, region: &Region, p: f64, positive: bool) -> Result<f64> {
    let g = field.grid();
    let nodes = region.nonempty_nodes(g)?;
    let mut s = 0.0;
    let mut sup = 0.0f64;
    for &i in &nodes {
        let l = laplacian_at(field, i)
            .ok_or_else(|| LabError::OutsideGrid("region touches the grid edge".into()))?;
        let v = if positive { l.max(0.0) } else { (-l).max(0.0) };
        s += v.powf(p);
        sup = sup.max(v);
    }
    if p.is_infinite() {
        return Ok(sup);
    }
    Ok((s * g.cell_volume()).powf(1.0 / p))
}

fn ball_nodes_values(field: &ScalarField, region: &Region) -> Result<Vec<f64>> {
    Ok(region.nonempty_nodes(field.grid())?.iter().map(|&i| field.at(i)).collect())
}

fn require_covered(field: &ScalarField, center: &Point, r: f64) -> Result<()> {
    if !field.grid().covers_box(center, r + field.grid().h()) {
        return Err(LabError::OutsideGrid(format!("ball of radius {r} (plus one node) leaves the grid")));
    }
    Ok(())
}

/// avg_{B_r(x₀)} u ≤ u(x₀) + C r^{2−n/p} ‖(Δu)₊‖_{L^p(B_r(x₀))}.
///
/// The ball average uses cell-fraction weights; `u(x₀)` is read at the
/// node nearest x₀. Tolerance h·max(1, osc) covers the quadrature error.
pub fn mean_value_check(field: &ScalarField, center: &Point, r: f64, p: f64) -> Result<CheckReport> {
    let g = field.grid();
    let n = g.dim();
    let c = mean_value_constant(n, p)?;
    require_covered(field, center, r)?;
    let ball = Region::ball(*center, r);
    let avg = ball_average(field, center, r)?;
    let u0 = field.at(g.nearest(center));
    let forcing = laplacian_part_norm(field, &ball, p, true)?;
    let rhs = u0 + c * r.powf(2.0 - n as f64 / p) * forcing;
    let osc = oscillation(field, &ball)?;
    let mut rep = CheckReport::new("mean_value", avg, rhs, g.h() * osc.max(1.0), g)
        .with_constants(EstimateConstants { c: Some(c), ..Default::default() });
    rep.note(format!("u(center) = {u0:e}, ||(lap u)+||_Lp = {forcing:e}, p = {p}"));
    Ok(rep)
}

/// avg_{B_{1/3}} u ≤ C (inf_{B_{1/3}} u + ‖(Δu)₊‖_{L^p(B₁)}), C = 2ⁿ(1 + C_mv),
/// via B_{1/3} ⊆ B_{2/3}(x₀) ⊆ B₁ at the measured inf point x₀.
pub fn weak_harnack_laplacian_check(field: &ScalarField, p: f64) -> Result<CheckReport> {
    let g = field.grid();
    let n = g.dim();
    let cmv = mean_value_constant(n, p)?;
    let origin = [0.0; 3];
    require_covered(field, &origin, 1.0)?;
    let b1 = Region::ball(origin, 1.0);
    let min_b1 = ball_nodes_values(field, &b1)?.into_iter().fold(f64::INFINITY, f64::min);
    if min_b1 < -1e-12 {
        return Err(LabError::Hypothesis(format!("u ≥ 0 violated on B1: min u = {min_b1:e}")));
    }
    let third = Region::ball(origin, 1.0 / 3.0);
    let nodes = third.nonempty_nodes(g)?;
    let x0 = *nodes
        .iter()
        .min_by(|&&a, &&b| field.at(a).total_cmp(&field.at(b)))
        .unwrap();
    let inf = field.at(x0);
    let avg = ball_average(field, &origin, 1.0 / 3.0)?;
    let forcing = laplacian_part_norm(field, &b1, p, true)?;
    let c = 2f64.powi(n as i32) * (1.0 + cmv);
    let rhs = c * (inf + forcing);
    let mut rep = CheckReport::new("weak_harnack_laplacian", avg, rhs, g.h() * inf.abs().max(1.0), g)
        .with_constants(EstimateConstants { c: Some(c), ..Default::default() });
    let xp = g.point(x0);
    rep.note(format!("inf point ({}, {}, {}), inf = {inf:e}, forcing = {forcing:e}", xp[0], xp[1], xp[2]));
    Ok(rep)
}

/// sup_{B_r} u / inf_{B_r} u ≤ ((1−r)/(1−3r))ⁿ for positive harmonic u on B₁.
///
/// `harmonic_tol` bounds max |Δ_h u| over the nodes of B₁. The tolerance
/// on the quotient is 0.05.
pub fn harnack_quotient_check(field: &ScalarField, r: f64, harmonic_tol: f64) -> Result<CheckReport> {
    if !(r > 0.0 && r < 1.0 / 3.0) {
        return invalid(format!("r = {r} must lie in (0, 1/3)"));
    }
    let g = field.grid();
    let n = g.dim();
    let origin = [0.0; 3];
    require_covered(field, &origin, 1.0)?;
    let b1 = Region::ball(origin, 1.0);
    let residual = laplacian_part_norm(field, &b1, f64::INFINITY, true)?
        .max(laplacian_part_norm(field, &b1, f64::INFINITY, false)?);
    if residual > harmonic_tol {
        return Err(LabError::Hypothesis(format!(
            "max |lap u| = {residual:e} exceeds harmonic tolerance {harmonic_tol:e}"
        )));
    }
    let vals = ball_nodes_values(field, &Region::ball(origin, r))?;
    let inf = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let sup = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(inf > 0.0) {
        return Err(LabError::Hypothesis(format!("u must be positive on B_r: inf = {inf:e}")));
    }
    let bound = ((1.0 - r) / (1.0 - 3.0 * r)).powi(n as i32);
    let mut rep = CheckReport::new("harnack_quotient", sup / inf, bound, 0.05, g);
    rep.note(format!("sup = {sup:e}, inf = {inf:e}, r = {r}, max |lap u| = {residual:e}"));
    Ok(rep)
}

/// Which forcing the local maximum principle is stated with.
#[derive(Clone, Copy, Debug)]
pub enum LocalMaxMode {
    /// ‖(Δu)₋‖_{L^p(B₁)}, p > n/2.
    Laplacian { p: f64 },
    /// ‖(P⁺(D²u))₋‖_{Lⁿ(B₁)}.
    Pucci { ell: Ellipticity },
}

/// Pinned constant for the Pucci mode with ε = 1. Solved P⁺ fields shifted
/// down by 1 and Gaussian bumps (λ = 1, Λ = 2, h = 1/64) reach ratio 0.83.
pub const LOCAL_MAX_PUCCI_C: f64 = 2.0;

/// max_{B̄_{1/2}} u₊ ≤ C (‖u₊‖_{L^ε(B₁)} + forcing).
///
/// Laplacian mode uses the constant from the mean value property:
/// C = max(|B_{1/2}|^{−1/ε}, C_mv 2^{n/p−2}), valid for ε ≥ 1.
/// Pucci mode uses [`LOCAL_MAX_PUCCI_C`] unless `c_override` is given.
pub fn local_max_check(
    field: &ScalarField,
    mode: LocalMaxMode,
    eps: f64,
    c_override: Option<f64>,
) -> Result<CheckReport> {
    let g = field.grid();
    let n = g.dim();
    if !(eps > 0.0) {
        return invalid(format!("eps = {eps} must be positive"));
    }
    let origin = [0.0; 3];
    require_covered(field, &origin, 1.0)?;
    let b1 = Region::ball(origin, 1.0);
    let pos = field.map(|v| v.max(0.0))?;
    let lhs = ball_nodes_values(&pos, &Region::closed_ball(origin, 0.5))?
        .into_iter()
        .fold(0.0, f64::max);
    let mass = lp_norm(&pos, &b1, eps)?;
    let (forcing, derived, label) = match mode {
        LocalMaxMode::Laplacian { p } => {
            if eps < 1.0 {
                return invalid("Laplacian mode derives its constant for eps >= 1 only");
            }
            let cmv = mean_value_constant(n, p)?;
            let c = (unit_ball_volume(n) * 0.5f64.powi(n as i32))
                .powf(-1.0 / eps)
                .max(cmv * 2f64.powf(n as f64 / p - 2.0));
            (laplacian_part_norm(field, &b1, p, false)?, c, "laplacian")
        }
        LocalMaxMode::Pucci { ell } => {
            let nodes = b1.nonempty_nodes(g)?;
            let mut s = 0.0;
            for &i in &nodes {
                let m = hessian_at(field, i)
                    .ok_or_else(|| LabError::OutsideGrid("B1 touches the grid edge".into()))?;
                s += (-pucci_plus(&m, &ell)).max(0.0).powi(n as i32);
            }
            ((s * g.cell_volume()).powf(1.0 / n as f64), LOCAL_MAX_PUCCI_C, "pucci")
        }
    };
    let c = c_override.unwrap_or(derived);
    let mut rep = CheckReport::new("local_max", lhs, c * (mass + forcing), 0.0, g)
        .with_constants(EstimateConstants { epsilon: Some(eps), c: Some(c), ..Default::default() });
    rep.note(format!("mode = {label}, ||u+||_L^eps = {mass:e}, forcing = {forcing:e}"));
    Ok(rep)
}

/// Extrapolates ρ^{−2}(avg_{B_ρ} u − u(x)) to ρ → 0 (Richardson on ρ, ρ/2)
/// and compares the limit with Δ_h u(x)/(2(n+2)).
///
/// Returns the extrapolated limit and a report with lhs = |limit − expected|.
pub fn ball_average_laplacian(
    field: &ScalarField,
    point: &Point,
    rho: f64,
    tolerance: f64,
) -> Result<(f64, CheckReport)> {
    let g = field.grid();
    let n = g.dim();
    if rho / 2.0 < 4.0 * g.h() {
        return Err(LabError::GridTooSmall(format!("rho/2 = {} is below 4h", rho / 2.0)));
    }
    require_covered(field, point, rho)?;
    let idx = g
        .locate(point)
        .ok_or_else(|| LabError::InvalidParameter("point must be a grid node".into()))?;
    let u0 = field.at(idx);
    let q = |r: f64| -> Result<f64> { Ok((ball_average(field, point, r)? - u0) / (r * r)) };
    let (q1, q2) = (q(rho)?, q(rho / 2.0)?);
    let limit = (4.0 * q2 - q1) / 3.0;
    let lap = laplacian_at(field, idx).ok_or_else(|| LabError::OutsideGrid("point on grid edge".into()))?;
    let expected = lap / (2.0 * (n as f64 + 2.0));
    let mut rep = CheckReport::new("ball_average_laplacian", (limit - expected).abs(), 0.0, tolerance, g)
        .with_constants(EstimateConstants { c: Some(1.0 / (2.0 * (n as f64 + 2.0))), ..Default::default() });
    rep.note(format!("q(rho) = {q1:e}, q(rho/2) = {q2:e}, limit = {limit:e}, lap = {lap:e}"));
    if lap.abs() > 1e-12 {
        rep.note(format!("measured C = {:e}", limit / lap));
    }
    Ok((limit, rep))
}

/// Default constant in the mollification bound C h² osc/ε². Smooth harmonic
/// samples at ε = 1/4 stay below 1e-5 in these units; quadratics are exact.
pub const MOLLIFY_C: f64 = 1e-3;

/// Quartic bump (1 − |y/ε|²)² on the lattice, normalized by its lattice sum.
pub fn quartic_bump(h: f64, dim: usize, eps: f64) -> Vec<([isize; 3], f64)> {
    let m = (eps / h).ceil() as isize;
    let range = |a: usize| if a < dim { -m..=m } else { 0..=0 };
    let mut out = Vec::new();
    for i in range(0) {
        for j in range(1) {
            for k in range(2) {
                let r2 = ((i * i + j * j + k * k) as f64) * h * h / (eps * eps);
                if r2 < 1.0 {
                    out.push(([i, j, k], (1.0 - r2).powi(2)));
                }
            }
        }
    }
    let total: f64 = out.iter().map(|(_, w)| w).sum();
    for (_, w) in out.iter_mut() {
        *w /= total;
    }
    out
}

/// max over nodes at distance ≥ ε from the grid edge of |u − η_ε ∗ u|,
/// against MOLLIFY_C·h²·osc(u)/ε² (or `c` in place of MOLLIFY_C).
pub fn mollification_identity_check(field: &ScalarField, eps: f64, c: Option<f64>) -> Result<CheckReport> {
    let g = field.grid();
    if eps < 3.0 * g.h() * (1.0 - 1e-12) {
        return Err(LabError::GridTooSmall(format!("eps = {eps} is below 3h")));
    }
    let bump = quartic_bump(g.h(), g.dim(), eps);
    let m = (eps / g.h()).ceil() as usize;
    let inner = g.interior(m).map_err(|_| LabError::GridTooSmall("eps too large for grid".into()))?;
    let mut worst = 0.0f64;
    for i in 0..inner.len() {
        let idx = g.locate(&inner.point(i)).unwrap();
        let ijk = g.multi(idx);
        let conv: f64 = bump
            .iter()
            .map(|(off, w)| w * field.at_multi(g.shift(ijk, *off).unwrap()))
            .sum();
        worst = worst.max((conv - field.at(idx)).abs());
    }
    let osc = field.max() - field.min();
    let c = c.unwrap_or(MOLLIFY_C);
    let bound = c * g.h() * g.h() * osc / (eps * eps);
    let mut rep = CheckReport::new("mollification_identity", worst, bound, 1e-12 * (1.0 + osc), g)
        .with_constants(EstimateConstants { c: Some(c), ..Default::default() });
    rep.note(format!("eps = {eps}, bump nodes = {}", bump.len()));
    Ok(rep)
}

/// Morrey constant from the mean-oscillation bound on convex sets:
/// osc_{B_r} u ≤ C r^{1−n/p} ‖Du‖_{L^p(B_r)},
/// C = 2^{n+2−n/p} (n|B₁|)^{−1/p} ((1−n)q + n)^{−1/q}, q = p/(p−1).
pub fn morrey_constant(n: usize, p: f64) -> Result<f64> {
    let nf = n as f64;
    if !(p > nf) {
        return invalid(format!("Morrey needs p > n: p = {p}, n = {n}"));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let q = p / (p - 1.0);
    Ok(2f64.powf(nf + 2.0 - nf / p)
        * (nf * unit_ball_volume(n)).powf(-1.0 / p)
        * ((1.0 - nf) * q + nf).powf(-1.0 / q))
}

/// Morrey's inequality.
///
/// In 1D: [u]_{C^{0,1−1/p}([0,1])} ≤ ‖u′‖_{L^p(0,1)} with forward differences,
/// which holds exactly on the lattice by the discrete Hölder inequality.
/// Otherwise: sup_{r<1/2} r^{−(1−n/p)} osc_{B̄_r} u ≤ C ‖D_h u‖_{L^p(B₁)},
/// radii sampled at multiples of h.
pub fn morrey_check(field: &ScalarField, p: f64) -> Result<CheckReport> {
    let g = field.grid();
    let n = g.dim();
    let c = morrey_constant(n, p)?;
    if n == 1 {
        let unit = Region::cube([0.5, 0.0, 0.0], 1.0);
        let nodes = unit.nonempty_nodes(g)?;
        if !g.covers_box(&[0.5, 0.0, 0.0], 0.5) {
            return Err(LabError::OutsideGrid("grid must cover [0,1]".into()));
        }
        let alpha = 1.0 - 1.0 / p;
        let lhs = holder_seminorm(field, &unit, alpha)?;
        let h = g.h();
        let s: f64 = nodes
            .windows(2)
            .map(|w| ((field.at(w[1]) - field.at(w[0])) / h).abs().powf(p) * h)
            .sum();
        let rhs = s.powf(1.0 / p);
        return Ok(CheckReport::new("morrey", lhs, rhs, 1e-12 * (1.0 + rhs), g)
            .with_constants(EstimateConstants { alpha: Some(alpha), c: Some(1.0), ..Default::default() }));
    }
    let origin = [0.0; 3];
    require_covered(field, &origin, 1.0)?;
    let gamma = 1.0 - n as f64 / p;
    let nodes = Region::ball(origin, 1.0).nonempty_nodes(g)?;
    let mut s = 0.0;
    for &i in &nodes {
        let d = gradient_at(field, i).unwrap();
        s += norm(&d).powf(p);
    }
    let grad = (s * g.cell_volume()).powf(1.0 / p);
    let half = Region::ball(origin, 0.5).nonempty_nodes(g)?;
    let mut pts: Vec<(f64, f64)> = half.iter().map(|&i| (dist2(&g.point(i), &origin).sqrt(), field.at(i))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // sweep radii outward, extending the running min and max
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut lhs = 0.0f64;
    let mut k = 0;
    while k < pts.len() {
        let r = pts[k].0;
        while k < pts.len() && pts[k].0 <= r + 1e-12 {
            lo = lo.min(pts[k].1);
            hi = hi.max(pts[k].1);
            k += 1;
        }
        if r > 0.0 {
            lhs = lhs.max((hi - lo) / r.powf(gamma));
        }
    }
    let mut rep = CheckReport::new("morrey", lhs, c * grad, 1e-12 * (1.0 + lhs), g)
        .with_constants(EstimateConstants { alpha: Some(gamma), c: Some(c), ..Default::default() });
    rep.note(format!("||D_h u||_Lp(B1) = {grad:e}, p = {p}"));
    Ok(rep)
}

/// Rolle-type interpolation: touch u from below by the concave paraboloid
/// φ(x) = min + osc (1 − |x−x₁|²/(δr)²) on B̄_{δr}(x₁) and bound the
/// gradient at the touching point x₂ by 2 osc/(δr).
///
/// At a discrete minimum of w = u − φ the centered difference of w is at
/// most h/2 times its second difference per axis; that amount is the
/// tolerance. A minimum on the sphere is flagged in the notes.
pub fn rolle_gradient_point(field: &ScalarField, x1: &Point, radius: f64) -> Result<(Point, CheckReport)> {
    let g = field.grid();
    if !(radius > 0.0) {
        return invalid("radius must be positive");
    }
    require_covered(field, x1, radius)?;
    let ball = Region::closed_ball(*x1, radius);
    let nodes = ball.nonempty_nodes(g)?;
    let vals: Vec<f64> = nodes.iter().map(|&i| field.at(i)).collect();
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let osc = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max) - min;
    let phi = |p: &Point| min + osc * (1.0 - dist2(p, x1) / (radius * radius));
    let w = |i: usize| field.at(i) - phi(&g.point(i));
    let x2 = *nodes.iter().min_by(|&&a, &&b| w(a).total_cmp(&w(b))).unwrap();
    let p2 = g.point(x2);
    let grad = gradient_at(field, x2).ok_or_else(|| LabError::OutsideGrid("touching point on grid edge".into()))?;
    let ijk = g.multi(x2);
    let mut slack2 = 0.0;
    for a in 0..g.dim() {
        let mut e = [0isize; 3];
        e[a] = 1;
        let up = g.shift(ijk, e).map(|m| w(g.index(m))).unwrap();
        e[a] = -1;
        let dn = g.shift(ijk, e).map(|m| w(g.index(m))).unwrap();
        let sd = (up + dn - 2.0 * w(x2)).abs() / g.h();
        slack2 += (0.5 * sd).powi(2);
    }
    let bound = 2.0 * osc / radius;
    let mut rep = CheckReport::new("rolle_gradient", norm(&grad), bound, slack2.sqrt() + 1e-12 * (1.0 + bound), g)
        .with_constants(EstimateConstants { c: Some(2.0), ..Default::default() });
    let on_sphere = dist2(&p2, x1).sqrt() > radius - g.h();
    rep.note(format!("x2 = ({}, {}, {}), osc = {osc:e}", p2[0], p2[1], p2[2]));
    if on_sphere {
        rep.note("argmin within one node of the sphere");
    }
    Ok((p2, rep))
}

/// Concave Harnack: sup_{B₁} u ≤ 2/(1−r) inf_{B_r} u for concave u ≥ 0.
pub fn concave_harnack_check(field: &ScalarField, r: f64) -> Result<CheckReport> {
    if !(r > 0.0 && r < 1.0) {
        return invalid("r must lie in (0,1)");
    }
    let g = field.grid();
    let origin = [0.0; 3];
    let sup = ball_nodes_values(field, &Region::ball(origin, 1.0))?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let inf = ball_nodes_values(field, &Region::ball(origin, r))?.into_iter().fold(f64::INFINITY, f64::min);
    let c = 2.0 / (1.0 - r);
    Ok(CheckReport::new("concave_harnack", sup, c * inf, g.h() * sup.abs().max(1.0), g)
        .with_constants(EstimateConstants { c: Some(c), ..Default::default() }))
}

/// Convex local maximum: sup_{B_r} u ≤ 2ⁿ/(|B₁|(1−r)ⁿ) ‖u‖_{L¹(B₁∖B_r)} for convex u ≥ 0.
pub fn convex_local_max_check(field: &ScalarField, r: f64) -> Result<CheckReport> {
    if !(r > 0.0 && r < 1.0) {
        return invalid("r must lie in (0,1)");
    }
    let g = field.grid();
    let n = g.dim();
    let origin = [0.0; 3];
    let sup = ball_nodes_values(field, &Region::ball(origin, r))?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let shell = Region::ball(origin, 1.0).minus(Region::ball(origin, r));
    let l1 = lp_norm(field, &shell, 1.0)?;
    let c = 2f64.powi(n as i32) / (unit_ball_volume(n) * (1.0 - r).powi(n as i32));
    Ok(CheckReport::new("convex_local_max", sup, c * l1, g.h() * sup.abs().max(1.0), g)
        .with_constants(EstimateConstants { c: Some(c), ..Default::default() }))
}

/// Cell-weighted measure of B_r(center), used by tests as a quadrature oracle.
pub fn weighted_ball_measure(field: &ScalarField, center: &Point, r: f64) -> Result<f64> {
    let w = ball_weights(field.grid(), center, r)?;
    Ok(w.iter().map(|(_, w)| w).sum::<f64>() * field.grid().cell_volume())
}
