//! Distribution, Harnack and Hessian-tail checks for uniformly elliptic fields.

use crate::contact::{measure_constant, pucci_positive_norm, RadialProfileFamily};
use crate::coverings::dyadic_decomposition;
use crate::error::{invalid, LabError, Result};
use crate::grid::{unit_ball_volume, Grid, Region, ScalarField};
use crate::operators::{hessian_at, pucci_minus, pucci_plus, Ellipticity};
use crate::report::{CheckReport, EstimateConstants};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Number of log-spaced levels in distribution curves.
pub const DISTRIBUTION_LEVELS: usize = 64;

/// Pinned (η, M) for the weak Harnack inequality.
pub const WEAK_HARNACK_ETA: f64 = 0.25;
pub const WEAK_HARNACK_M: f64 = 8.0;

/// Pinned Harnack constant. On the spike family (λ = 1, Λ = 2, h = 1/16)
/// the measured sup/(inf + ‖f‖) stays below 0.43.
pub const HARNACK_UE_C: f64 = 4.0;

/// Open cube of the given side centered at the origin.
pub fn open_cube(dim: usize, side: f64) -> Region {
    let mut r = Region::All;
    for a in 0..dim {
        let mut e = [0.0; 3];
        e[a] = 1.0;
        r = r.intersect(Region::open_half_space(e, side / 2.0));
        e[a] = -1.0;
        r = r.intersect(Region::open_half_space(e, side / 2.0));
    }
    r
}

/// ε = −ln(1−η)/ln M and C = M^ε.
pub fn weak_harnack_constants(eta: f64, m: f64) -> Result<(f64, f64)> {
    if !(eta > 0.0 && eta < 1.0) {
        return invalid(format!("eta = {eta} not in (0,1)"));
    }
    if !(m > 1.0) {
        return invalid(format!("M = {m} must exceed 1"));
    }
    let eps = -(1.0 - eta).ln() / m.ln();
    Ok((eps, m.powf(eps)))
}

/// The curve μ ↦ |{u ≥ μ} ∩ region| at log-spaced levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionCurve {
    pub levels: Vec<f64>,
    pub measures: Vec<f64>,
}

impl DistributionCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("mu,measure\n");
        for (m, v) in self.levels.iter().zip(&self.measures) {
            s.push_str(&format!("{m},{v}\n"));
        }
        s
    }
}

/// Distribution curve of `values` (one per node, cell volume `vol`) at
/// `count` levels log-spaced between the smallest positive value and the max.
pub fn distribution_curve(values: &[f64], vol: f64, count: usize) -> Result<DistributionCurve> {
    let mut pos: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    if pos.is_empty() {
        return Ok(DistributionCurve { levels: Vec::new(), measures: Vec::new() });
    }
    if count < 2 {
        return invalid("need at least two levels");
    }
    pos.sort_by(|a, b| a.total_cmp(b));
    let (lo, hi) = (pos[0], *pos.last().unwrap());
    let mut levels = Vec::with_capacity(count);
    let mut measures = Vec::with_capacity(count);
    for k in 0..count {
        let mu = if hi > lo { lo * (hi / lo).powf(k as f64 / (count - 1) as f64) } else { lo };
        let below = pos.partition_point(|v| *v < mu);
        levels.push(mu);
        measures.push((pos.len() - below) as f64 * vol);
    }
    Ok(DistributionCurve { levels, measures })
}

/// sup_{μ>0} μ^ε |{u ≥ μ}|, exact over the node values.
fn distribution_sup(values: &[f64], vol: f64, eps: f64) -> f64 {
    let mut pos: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    pos.sort_by(|a, b| b.total_cmp(a));
    let mut best = 0.0f64;
    let mut k = 0;
    while k < pos.len() {
        let v = pos[k];
        while k < pos.len() && pos[k] == v {
            k += 1;
        }
        best = best.max(v.powf(eps) * k as f64 * vol);
    }
    best
}

fn nodes_of(grid: &Grid, region: &Region) -> Result<Vec<usize>> {
    region.nonempty_nodes(grid)
}

fn big_ball(n: usize) -> Region {
    Region::ball([0.0; 3], 3.0 * (n as f64).sqrt())
}

fn require_ball_covered(grid: &Grid, r: f64) -> Result<()> {
    if !grid.covers_box(&[0.0; 3], r + grid.h()) {
        return Err(LabError::OutsideGrid(format!("grid must cover the ball of radius {r}")));
    }
    Ok(())
}

fn require_nonnegative(field: &ScalarField, nodes: &[usize]) -> Result<()> {
    let worst = nodes.iter().map(|&i| field.at(i)).fold(f64::INFINITY, f64::min);
    if worst < -1e-12 {
        return Err(LabError::Hypothesis(format!("u ≥ 0 violated: min u = {worst:e}")));
    }
    Ok(())
}

/// sup_μ μ^ε |{u ≥ μ} ∩ Q₁| ≤ C (min_{Q̄₃} u + ‖(P⁻(D²u))₊‖_{Lⁿ(B_{3√n})})^ε
/// with (ε, C) from (η, M).
///
/// The supremum is taken exactly over node values; the 64-level curve is
/// returned for plotting.
pub fn weak_harnack_ue_check(
    field: &ScalarField,
    ell: &Ellipticity,
    eta: f64,
    m: f64,
) -> Result<(CheckReport, DistributionCurve)> {
    let g = field.grid();
    let n = g.dim();
    let (eps, c) = weak_harnack_constants(eta, m)?;
    require_ball_covered(g, 3.0 * (n as f64).sqrt())?;
    let ball = nodes_of(g, &big_ball(n))?;
    require_nonnegative(field, &ball)?;
    let forcing = pucci_positive_norm(field, ell, &ball);
    let q3 = nodes_of(g, &Region::cube([0.0; 3], 3.0))?;
    let min3 = q3.iter().map(|&i| field.at(i)).fold(f64::INFINITY, f64::min);
    let q1: Vec<f64> = nodes_of(g, &open_cube(n, 1.0))?.iter().map(|&i| field.at(i)).collect();
    let lhs = distribution_sup(&q1, g.cell_volume(), eps);
    let curve = distribution_curve(&q1, g.cell_volume(), DISTRIBUTION_LEVELS)?;
    let rhs = c * (min3.max(0.0) + forcing).powf(eps);
    let mut rep = CheckReport::new("weak_harnack_ue", lhs, rhs, 0.0, g).with_constants(EstimateConstants {
        eta: Some(eta),
        m: Some(m),
        epsilon: Some(eps),
        c: Some(c),
        ..Default::default()
    });
    rep.note(format!("min over closed Q3 = {min3:e}, forcing = {forcing:e}"));
    Ok((rep, curve))
}

/// Default (η, M) for the diminish-of-distribution check: η = η₀|B_{1/2}|
/// with η₀ = |B_{1/4}|/(2C) the measure-estimate constant, and M the
/// supremum of the localization profile family at ρ = 1/4.
pub fn diminish_constants(ell: &Ellipticity, n: usize) -> Result<(f64, f64)> {
    let eta0 = unit_ball_volume(n) * 0.25f64.powi(n as i32) / (2.0 * measure_constant(ell, n));
    let eta = eta0 * unit_ball_volume(n) * 0.5f64.powi(n as i32);
    let fam = RadialProfileFamily::for_ellipticity(ell.lambda, ell.big_lambda, n, 0.25)?;
    Ok((eta, fam.supremum()))
}

/// |{1 < u ≤ M} ∩ Q₁| ≥ η |{u > 1} ∩ Q₁|, with lhs = η|{u > 1} ∩ Q₁|.
///
/// The dyadic decomposition of {u > 1} ∩ Q̄₁ is run down to the grid scale;
/// for each selected cube the density of {u ≤ M} in its progenitor is
/// recorded, the quantity the localized measure estimate bounds below.
pub fn diminish_of_distribution_check(
    field: &ScalarField,
    ell: &Ellipticity,
    delta: f64,
    constants: Option<(f64, f64)>,
) -> Result<CheckReport> {
    let g = field.grid();
    let n = g.dim();
    require_ball_covered(g, 3.0 * (n as f64).sqrt())?;
    let ball = nodes_of(g, &big_ball(n))?;
    require_nonnegative(field, &ball)?;
    let forcing = pucci_positive_norm(field, ell, &ball);
    if forcing > delta {
        return Err(LabError::Hypothesis(format!("forcing {forcing:e} exceeds delta {delta:e}")));
    }
    let q3 = nodes_of(g, &Region::cube([0.0; 3], 3.0))?;
    let min3 = q3.iter().map(|&i| field.at(i)).fold(f64::INFINITY, f64::min);
    if min3 > 1.0 {
        return Err(LabError::Hypothesis(format!("min over closed Q3 = {min3:e} > 1")));
    }
    let (eta, m) = match constants {
        Some(c) => c,
        None => diminish_constants(ell, n)?,
    };
    let q1 = nodes_of(g, &open_cube(n, 1.0))?;
    let vol = g.cell_volume();
    let above = q1.iter().filter(|&&i| field.at(i) > 1.0).count() as f64 * vol;
    let band = q1.iter().filter(|&&i| field.at(i) > 1.0 && field.at(i) <= m).count() as f64 * vol;
    let mut rep = CheckReport::new("diminish_of_distribution", eta * above, band, 0.0, g).with_constants(
        EstimateConstants { delta: Some(delta), eta: Some(eta), m: Some(m), ..Default::default() },
    );
    rep.note(format!("forcing = {forcing:e}, min over closed Q3 = {min3:e}"));
    if above > 0.0 {
        let depth = ((1.0 / g.h()).log2().floor() as i64 - 1).max(0) as u32;
        let shared = Arc::new(field.clone());
        let e = Region::superlevel(shared.clone(), 1.0, true).intersect(Region::cube([0.0; 3], 1.0));
        let dec = dyadic_decomposition(&e, n, depth)?;
        let low = Region::sublevel(shared, m);
        let mut min_density = f64::INFINITY;
        for q in &dec.cubes {
            let parent = q.parent().unwrap_or(*q);
            let cube = Region::cube(parent.center(n), parent.side());
            let total = cube.count(g);
            if total > 0 {
                let good = cube.clone().intersect(low.clone()).count(g);
                min_density = min_density.min(good as f64 / total as f64);
            }
        }
        rep.note(format!(
            "dyadic cubes = {}, residual = {:e}, min density of {{u <= M}} in progenitors = {:e}",
            dec.cubes.len(),
            dec.residual_measure,
            min_density
        ));
    }
    Ok(rep)
}

/// ‖f‖_{Lⁿ(B₁)} for the smallest f ≥ 0 with P⁻(D²u) ≤ f and P⁺(D²u) ≥ −f.
pub fn sandwich_forcing_norm(field: &ScalarField, ell: &Ellipticity) -> Result<f64> {
    let g = field.grid();
    let n = g.dim();
    require_ball_covered(g, 1.0)?;
    let nodes = nodes_of(g, &Region::ball([0.0; 3], 1.0))?;
    let mut s = 0.0;
    for &i in &nodes {
        let m = hessian_at(field, i).ok_or_else(|| LabError::OutsideGrid("B1 touches the grid edge".into()))?;
        let f = pucci_minus(&m, ell).max(0.0).max((-pucci_plus(&m, ell)).max(0.0));
        s += f.powi(n as i32);
    }
    Ok((s * g.cell_volume()).powf(1.0 / n as f64))
}

/// sup_{B_{1/2}} u ≤ C (inf_{B_{1/2}} u + ‖f‖_{Lⁿ(B₁)}), f the sandwich forcing.
pub fn harnack_ue_check(field: &ScalarField, ell: &Ellipticity, c: Option<f64>) -> Result<CheckReport> {
    let g = field.grid();
    let forcing = sandwich_forcing_norm(field, ell)?;
    let b1 = nodes_of(g, &Region::ball([0.0; 3], 1.0))?;
    require_nonnegative(field, &b1)?;
    let half: Vec<f64> = nodes_of(g, &Region::ball([0.0; 3], 0.5))?.iter().map(|&i| field.at(i)).collect();
    let sup = half.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inf = half.iter().copied().fold(f64::INFINITY, f64::min);
    let c = c.unwrap_or(HARNACK_UE_C);
    let mut rep = CheckReport::new("harnack_ue", sup, c * (inf + forcing), 0.0, g)
        .with_constants(EstimateConstants { c: Some(c), ..Default::default() });
    rep.note(format!("sup = {sup:e}, inf = {inf:e}, forcing = {forcing:e}, ratio = {:e}", sup / (inf + forcing)));
    Ok(rep)
}

/// Tail of μ ↦ |{|(D²u)₋|_op ≥ μ} ∩ Q₁| with a fitted decay exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianTail {
    pub curve: DistributionCurve,
    /// −slope of ln measure against ln μ over the upper half of the levels
    pub epsilon: f64,
    pub r_squared: f64,
    /// sup_μ μ^ε |{…}| at the fitted ε
    pub bound: f64,
}

pub fn hessian_tail(field: &ScalarField) -> Result<HessianTail> {
    let g = field.grid();
    let n = g.dim();
    let nodes = nodes_of(g, &open_cube(n, 1.0))?;
    let mut vals = Vec::with_capacity(nodes.len());
    for &i in &nodes {
        let m = hessian_at(field, i).ok_or_else(|| LabError::OutsideGrid("Q1 touches the grid edge".into()))?;
        vals.push((-m.min_eigenvalue()).max(0.0));
    }
    let curve = distribution_curve(&vals, g.cell_volume(), DISTRIBUTION_LEVELS)?;
    let pts: Vec<(f64, f64)> = curve
        .levels
        .iter()
        .zip(&curve.measures)
        .skip(DISTRIBUTION_LEVELS / 2)
        .filter(|(_, m)| **m > 0.0)
        .map(|(l, m)| (l.ln(), m.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(LabError::InvalidParameter("Hessian tail has fewer than 3 positive levels".into()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let epsilon = -sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let bound = if epsilon > 0.0 { distribution_sup(&vals, g.cell_volume(), epsilon) } else { f64::INFINITY };
    Ok(HessianTail { curve, epsilon, r_squared, bound })
}

/// Pinned constant in max_{B_{1/2}} (v_{2,h})₋ ≤ C osc_{B₁} u, measured on
/// solved P⁺ fields with random traces (largest ratio seen: 0.73).
pub const HESSIAN_C: f64 = 2.0;

/// Second differences of a solved P⁺(D²u) = 0 field on B₁.
///
/// Convexity of P⁺ gives P⁻(D²_h v) ≤ 4τ/s² for v = v_{2,s} along a
/// lattice direction e with step s, τ the solver residual; this is checked
/// at nodes of B_{1−4h}. The second report bounds max_{B_{1/2}} v₋ by
/// C·osc_{B₁} u. Directions: the axes and the first diagonal.
pub fn hessian_second_difference_check(
    field: &ScalarField,
    ell: &Ellipticity,
    residual: f64,
    c: Option<f64>,
) -> Result<(CheckReport, CheckReport)> {
    let g = field.grid();
    let n = g.dim();
    let h = g.h();
    require_ball_covered(g, 1.0)?;
    let osc = crate::grid::oscillation(field, &Region::ball([0.0; 3], 1.0))?;
    let mut dirs: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|a| {
            let mut e = vec![0.0; n];
            e[a] = 1.0;
            (e, h)
        })
        .collect();
    if n >= 2 {
        let mut e = vec![0.0; n];
        e[0] = std::f64::consts::FRAC_1_SQRT_2;
        e[1] = std::f64::consts::FRAC_1_SQRT_2;
        dirs.push((e, h * 2f64.sqrt()));
    }
    let (mut super_excess, mut tol, mut neg) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for (e, s) in &dirs {
        let v = crate::operators::second_difference(field, e, *s)?;
        let vg = v.grid();
        let bound = 4.0 * residual / (s * s);
        let mut scale = 0.0f64;
        for i in 0..vg.len() {
            let p = vg.point(i);
            let r = crate::grid::norm(&p);
            if r < 1.0 - 4.0 * h {
                if let Some(m) = hessian_at(&v, i) {
                    super_excess = super_excess.max(pucci_minus(&m, ell) - bound);
                    scale = scale.max(m.frobenius());
                }
            }
            if r < 0.5 {
                neg = neg.max(-v.at(i));
            }
        }
        tol = tol.max(1e-10 * scale);
    }
    let c = c.unwrap_or(HESSIAN_C);
    let mut sup = CheckReport::new("second_difference_supersolution", super_excess, 0.0, tol, g);
    sup.note(format!("max of P-(D2 v) - 4 tau/s^2 over directions, tau = {residual:e}"));
    let mut bound = CheckReport::new("second_difference_bound", neg, c * osc, 0.0, g)
        .with_constants(EstimateConstants { c: Some(c), ..Default::default() });
    bound.note(format!("osc over B1 = {osc:e}, measured ratio = {:e}", neg / osc.max(f64::MIN_POSITIVE)));
    Ok((sup, bound))
}
