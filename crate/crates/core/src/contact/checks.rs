use super::envelope::sup_convolution;
use super::family::{Family, ParaboloidFamily, ParaboloidSign, RadialProfileFamily};
use super::set::{boundary_flags, contact_set, ContactSet, TransportRecord};
use crate::error::{invalid, LabError, Result};
use crate::grid::{norm, unit_ball_volume, Grid, Point, Region, ScalarField};
use crate::operators::{hessian_at, pucci_minus, Ellipticity, SymMatrix};
use crate::report::{CheckReport, EstimateConstants};
use rayon::prelude::*;

/// ‖(P⁻(D²u))₊‖_{Lⁿ} over the given nodes (nodes without a full stencil are skipped).
pub fn pucci_positive_norm(field: &ScalarField, ell: &Ellipticity, nodes: &[usize]) -> f64 {
    let g = field.grid();
    let n = g.dim() as i32;
    // terms in parallel, sum in node order so the result is reproducible
    let terms: Vec<f64> = nodes
        .par_iter()
        .filter_map(|&i| hessian_at(field, i))
        .map(|m| pucci_minus(&m, ell).max(0.0).powi(n))
        .collect();
    let s: f64 = terms.iter().sum();
    (s * g.cell_volume()).powf(1.0 / n as f64)
}

/// Fraction of the nodes of `region` that have an axis neighbor outside it.
pub fn boundary_layer_fraction(grid: &Grid, region: &Region) -> Result<f64> {
    let mask = region.mask(grid);
    let total = mask.iter().filter(|&&m| m).count();
    if total == 0 {
        return Err(LabError::EmptyRegion);
    }
    let edge = boundary_flags(grid, &mask).iter().filter(|&&b| b).count();
    Ok(edge as f64 / total as f64)
}

/// |center_set| ≤ (1 + slack)·Σ det DT·hⁿ, the sum running over transported
/// band nodes whose image lands in the center set. The slack is the fraction
/// of center nodes on the set's own boundary layer.
pub fn area_formula_check(
    contact: &ContactSet,
    transport: &TransportRecord,
    center_set: &Region,
) -> Result<CheckReport> {
    let g = Grid::from_info(&contact.grid)?;
    let lhs = center_set.measure(&g);
    if lhs == 0.0 {
        return Err(LabError::EmptyRegion);
    }
    let raw: f64 = transport
        .entries
        .iter()
        .filter(|e| center_set.contains(&e.image))
        .map(|e| e.det)
        .sum::<f64>()
        * g.cell_volume();
    let slack = boundary_layer_fraction(&g, center_set)?;
    let mut r = CheckReport::new("area_formula", lhs, raw * (1.0 + slack), 1e-12 * lhs, &g);
    r.note(format!("sum of det DT h^n = {raw:e}"));
    r.note(format!("slack = {slack:e}"));
    r.note(format!("clamped determinant mass = {:e}", transport.clamped));
    r.note(format!("boundary band nodes skipped = {}", transport.skipped_boundary));
    Ok(r)
}

fn require_nonnegative(field: &ScalarField, nodes: &[usize]) -> Result<()> {
    let worst = nodes.iter().map(|&i| field.at(i)).fold(f64::INFINITY, f64::min);
    if worst < 0.0 {
        return Err(LabError::Hypothesis(format!("u ≥ 0 violated: min u = {worst:e}")));
    }
    Ok(())
}

fn require_small_forcing(field: &ScalarField, ell: &Ellipticity, nodes: &[usize], delta: f64) -> Result<f64> {
    let norm = pucci_positive_norm(field, ell, nodes);
    if norm > delta {
        return Err(LabError::Hypothesis(format!(
            "‖(P⁻(D²u))₊‖_Lⁿ = {norm:e} exceeds delta = {delta:e}"
        )));
    }
    Ok(norm)
}

/// Determinant constant C with det(I + D²u) ≤ C(1 + (P⁻)₊ⁿ) whenever D²u ≥ −I.
pub fn measure_constant(ell: &Ellipticity, n: usize) -> f64 {
    let a = (1.0 + (n as f64 - 1.0) * ell.big_lambda / ell.lambda).powi(n as i32);
    let b = ell.lambda.powi(-(n as i32));
    2f64.powi(n as i32 - 1) * a.max(b)
}

/// u ≥ 0 on B₁, small forcing, u(0) ≤ θ = 1/4 ⇒ |{u ≤ 1} ∩ B₁| ≥ η,
/// η = |B_{1/4}|/(2C) with C the larger of the theoretical and measured
/// determinant constants. Reports lhs = η, rhs = |{u ≤ 1} ∩ B₁|.
pub fn measure_estimate_check(field: &ScalarField, ell: &Ellipticity, delta: f64) -> Result<CheckReport> {
    let g = field.grid();
    let n = g.dim();
    let b1 = Region::ball([0.0; 3], 1.0);
    let nodes = b1.nonempty_nodes(g)?;
    require_nonnegative(field, &nodes)?;
    let forcing = require_small_forcing(field, ell, &nodes, delta)?;
    let theta = 0.25;
    let u0 = field
        .at_point(&[0.0; 3])
        .ok_or_else(|| LabError::OutsideGrid("origin is not a node".into()))?;
    let measured_set = nodes.iter().filter(|&&i| field.at(i) <= 1.0).count() as f64 * g.cell_volume();
    let c_theory = measure_constant(ell, n);
    let constants = |c: f64| EstimateConstants {
        theta: Some(theta),
        delta: Some(delta),
        eta: Some(unit_ball_volume(n) * 0.25f64.powi(n as i32) / (2.0 * c)),
        c: Some(c),
        ..Default::default()
    };
    if u0 > theta {
        let mut r = CheckReport::new("measure_estimate", 0.0, measured_set, 0.0, g)
            .with_constants(constants(c_theory));
        r.note(format!("u(0) = {u0:e} > theta: conclusion not required"));
        return Ok(r);
    }
    let family = ParaboloidFamily::new(
        1.0,
        ParaboloidSign::Concave,
        Region::ball([0.0; 3], 0.25),
        0.5 * 0.75 * 0.75,
    )?;
    let contact = contact_set(field, &family.into(), &b1)?;
    let points = contact.contact_points();
    let outside = points.iter().filter(|&&i| field.at(i) > 1.0).count();
    let c_measured = contact
        .interior_points()
        .iter()
        .filter_map(|&i| hessian_at(field, i))
        .map(|m| {
            let det = SymMatrix::identity(n).add(&m).det().max(0.0);
            det / (1.0 + pucci_minus(&m, ell).max(0.0).powi(n as i32))
        })
        .fold(0.0, f64::max);
    let c = c_theory.max(c_measured);
    let k = constants(c);
    let eta = k.eta.unwrap();
    let mut r = CheckReport::new("measure_estimate", eta, measured_set, 0.0, g).with_constants(k);
    r.note(format!("u(0) = {u0:e}"));
    r.note(format!("forcing norm = {forcing:e}"));
    r.note(format!("C theory = {c_theory:e}, C measured = {c_measured:e}"));
    r.note(format!("contact points = {}", points.len()));
    r.note(format!("contact points outside {{u <= 1}} = {outside}"));
    Ok(r)
}

/// Sampled checks of the three geometric properties of the radial family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileGeometry {
    /// min of φ_{y₀} over B̄_{1/2}; must be ≥ 1
    pub min_inner: f64,
    /// max of φ_{y₀} over ∂B₁; must be < 0
    pub max_outer: f64,
    /// min of |x − y₀| over x ∈ B₁∖B̄_ρ; must exceed ρ/2 (smooth branch)
    pub min_separation: f64,
}

impl ProfileGeometry {
    pub fn holds(&self, rho: f64) -> bool {
        self.min_inner >= 1.0 && self.max_outer < 0.0 && self.min_separation > rho / 2.0
    }
}

/// Evaluates the family over the center nodes of B_{ρ/2} and the nodes of
/// B̄_{1/2}, B₁∖B̄_ρ, plus 720 sample points per axis plane of ∂B₁.
pub fn profile_geometry(family: &RadialProfileFamily, grid: &Grid) -> Result<ProfileGeometry> {
    let centers: Vec<Point> = family.centers.nonempty_nodes(grid)?.iter().map(|&i| grid.point(i)).collect();
    let inner: Vec<Point> = Region::closed_ball([0.0; 3], 0.5).nodes(grid).iter().map(|&i| grid.point(i)).collect();
    let ring: Vec<Point> = Region::ball([0.0; 3], 1.0)
        .minus(Region::closed_ball([0.0; 3], family.rho))
        .nodes(grid)
        .iter()
        .map(|&i| grid.point(i))
        .collect();
    let n = grid.dim();
    let mut sphere: Vec<Point> = Vec::new();
    if n == 1 {
        sphere.push([1.0, 0.0, 0.0]);
        sphere.push([-1.0, 0.0, 0.0]);
    } else {
        for a in 0..n {
            for b in a + 1..n {
                for k in 0..720 {
                    let t = k as f64 * std::f64::consts::PI / 360.0;
                    let mut p = [0.0; 3];
                    p[a] = t.cos();
                    p[b] = t.sin();
                    sphere.push(p);
                }
            }
        }
    }
    let mut geo = ProfileGeometry { min_inner: f64::INFINITY, max_outer: f64::NEG_INFINITY, min_separation: f64::INFINITY };
    for y in &centers {
        for x in &inner {
            geo.min_inner = geo.min_inner.min(family.eval(y, x));
        }
        for x in &sphere {
            geo.max_outer = geo.max_outer.max(family.eval(y, x));
        }
        for x in &ring {
            geo.min_separation = geo.min_separation.min(crate::grid::dist2(x, y).sqrt());
        }
    }
    Ok(geo)
}

/// u ≥ 0, small forcing, min_{B̄_{1/2}} u ≤ 1 ⇒ min_{B̄_ρ} u ≤ M with
/// M = sup of the radial family built for (λ, Λ, ρ). lhs = min_{B̄_ρ} u, rhs = M.
pub fn localization_check(field: &ScalarField, ell: &Ellipticity, rho: f64, delta: f64) -> Result<CheckReport> {
    let g = field.grid();
    let n = g.dim();
    let nodes = Region::ball([0.0; 3], 1.0).nonempty_nodes(g)?;
    require_nonnegative(field, &nodes)?;
    let forcing = require_small_forcing(field, ell, &nodes, delta)?;
    let half = Region::closed_ball([0.0; 3], 0.5).nonempty_nodes(g)?;
    let min_half = half.iter().map(|&i| field.at(i)).fold(f64::INFINITY, f64::min);
    if min_half > 1.0 {
        return Err(LabError::Hypothesis(format!("min over closed B_1/2 is {min_half:e} > 1")));
    }
    let family = RadialProfileFamily::for_ellipticity(ell.lambda, ell.big_lambda, n, rho)?;
    let geo = profile_geometry(&family, g)?;
    let min_rho = Region::closed_ball([0.0; 3], rho)
        .nonempty_nodes(g)?
        .iter()
        .map(|&i| field.at(i))
        .fold(f64::INFINITY, f64::min);
    let m = family.supremum();
    let mut r = CheckReport::new("localization", min_rho, m, 0.0, g).with_constants(EstimateConstants {
        rho: Some(rho),
        delta: Some(delta),
        m: Some(m),
        alpha: Some(family.alpha),
        ..Default::default()
    });
    r.note(format!("C0 = {}, C1 = {:e}", family.c0, family.c1));
    r.note(format!("forcing norm = {forcing:e}"));
    r.note(format!(
        "geometry: min phi on B_1/2 = {:e}, max phi on dB_1 = {:e}, min separation = {:e}, holds = {}",
        geo.min_inner,
        geo.max_outer,
        geo.min_separation,
        geo.holds(rho)
    ));
    Ok(r)
}

/// ABP constant from the slope-covering argument: |B_{m/2}| ≤ ∫_A (P⁻/(nλ))ⁿ.
pub fn abp_constant(ell: &Ellipticity, n: usize) -> f64 {
    2.0 / (n as f64 * ell.lambda * unit_ball_volume(n).powf(1.0 / n as f64))
}

/// One min- (or max-) plus sweep along `axis` of a row-major 3D array:
/// out[.., j, ..] = min_i in[.., i, ..] − w(j, i), or max_i in + w(j, i).
fn axis_sweep<W>(input: &[f64], dims: [usize; 3], axis: usize, new_len: usize, w: W, minimize: bool) -> (Vec<f64>, [usize; 3])
where
    W: Fn(usize, usize) -> f64 + Sync,
{
    let mut od = dims;
    od[axis] = new_len;
    let stride = [dims[1] * dims[2], dims[2], 1];
    let out = (0..od.iter().product::<usize>())
        .into_par_iter()
        .map(|o| {
            let idx = [o / (od[1] * od[2]), (o / od[2]) % od[1], o % od[2]];
            let base: usize = (0..3).filter(|&a| a != axis).map(|a| idx[a] * stride[a]).sum();
            let j = idx[axis];
            let mut best = if minimize { f64::INFINITY } else { f64::NEG_INFINITY };
            for i in 0..dims[axis] {
                let v = input[base + i * stride[axis]];
                if minimize {
                    best = best.min(v - w(j, i));
                } else {
                    best = best.max(v + w(j, i));
                }
            }
            best
        })
        .collect();
    (out, od)
}

/// Nodes of B̄₁ touched from below by a plane whose slope lies on the
/// lattice of spacing m/(2·k) inside B_{m/2}, k the grid's node count per axis.
///
/// Node x is touched iff u(x) − max_p (p·x + u*(p)) ≤ tie, with u* the
/// discrete Legendre transform over B̄₁ restricted to the slope lattice.
/// Both transforms are separable, one axis at a time.
pub fn planar_contact_set(field: &ScalarField, m: f64) -> Result<Vec<usize>> {
    let g = field.grid();
    let n = g.dim();
    let closed = Region::closed_ball([0.0; 3], 1.0);
    let nodes = closed.nonempty_nodes(g)?;
    let k = g.counts()[0] as isize;
    let step = m / (2.0 * k as f64);
    let mut dims = [1usize; 3];
    let mut slopes: [Vec<f64>; 3] = [vec![0.0], vec![0.0], vec![0.0]];
    let mut coords: [Vec<f64>; 3] = [vec![0.0], vec![0.0], vec![0.0]];
    for a in 0..n {
        dims[a] = g.counts()[a];
        slopes[a] = (-k..=k).map(|j| j as f64 * step).collect();
        coords[a] = (0..dims[a]).map(|i| g.coord(a, i)).collect();
    }
    let mut lifted = vec![f64::INFINITY; g.len()];
    for &i in &nodes {
        lifted[i] = field.at(i);
    }
    // u*(p) = min over nodes of u(x) − p·x
    let (mut t, mut d) = (lifted, dims);
    for a in (0..3).rev() {
        let (s, c) = (&slopes[a], &coords[a]);
        (t, d) = axis_sweep(&t, d, a, s.len(), |j, i| s[j] * c[i], true);
    }
    for (o, v) in t.iter_mut().enumerate() {
        let idx = [o / (d[1] * d[2]), (o / d[2]) % d[1], o % d[2]];
        let p = [slopes[0][idx[0]], slopes[1][idx[1]], slopes[2][idx[2]]];
        if !(norm(&p) < m / 2.0) {
            *v = f64::NEG_INFINITY;
        }
    }
    // u**(x) = max over admitted slopes of p·x + u*(p)
    for a in 0..3 {
        let (s, c) = (&slopes[a], &coords[a]);
        (t, d) = axis_sweep(&t, d, a, c.len(), |i, j| s[j] * c[i], false);
    }
    let scale = field.values().iter().fold(0.0f64, |a, v| a.max(v.abs())) + m;
    let tie = 1e-12 * (1.0 + scale);
    Ok(nodes.into_iter().filter(|&i| field.at(i) - t[i] <= tie).collect())
}

/// max_{B̄₁} u₋ ≤ C_impl·‖(P⁻(D²u))₊‖_{Lⁿ(A)} over the planar contact set A.
/// With `forcing` given, its positive part replaces P⁻(D²u) on A.
pub fn abp_bound(field: &ScalarField, ell: &Ellipticity, forcing: Option<&ScalarField>) -> Result<CheckReport> {
    let g = field.grid();
    let n = g.dim();
    let closed = Region::closed_ball([0.0; 3], 1.0);
    let mask = closed.mask(g);
    let edge = boundary_flags(g, &mask);
    // The outermost nodes of B̄₁ sit up to h inside the sphere, so a field
    // vanishing on ∂B₁ is slightly negative there. The estimate is applied to
    // u + shift, shift = max of u₋ over that layer; the Hessian is unchanged.
    let worst_edge = (0..g.len()).filter(|&i| edge[i]).map(|i| field.at(i)).fold(f64::INFINITY, f64::min);
    let shift = (-worst_edge).max(0.0);
    let nodes = closed.nonempty_nodes(g)?;
    let m = nodes.iter().map(|&i| (-field.at(i) - shift).max(0.0)).fold(0.0, f64::max);
    let c_impl = abp_constant(ell, n);
    let consts = EstimateConstants { c: Some(c_impl), ..Default::default() };
    if m == 0.0 {
        let mut r = CheckReport::new("abp", 0.0, 0.0, 0.0, g).with_constants(consts);
        r.note(format!("no negative part after boundary shift {shift:e}"));
        return Ok(r);
    }
    if let Some(f) = forcing {
        if f.grid() != g {
            return Err(LabError::GridMismatch("forcing must live on the field's grid".into()));
        }
    }
    let a = planar_contact_set(field, m)?;
    let s: f64 = a
        .iter()
        .map(|&i| {
            let v = match forcing {
                Some(f) => f.at(i),
                None => hessian_at(field, i).map(|h| pucci_minus(&h, ell)).unwrap_or(0.0),
            };
            v.max(0.0).powi(n as i32)
        })
        .sum();
    let norm_a = (s * g.cell_volume()).powf(1.0 / n as f64);
    let mut r = CheckReport::new("abp", m, c_impl * norm_a, 1e-12 * m, g).with_constants(consts);
    r.note(format!("boundary shift = {shift:e}"));
    r.note(format!("|A| nodes = {}", a.len()));
    r.note(format!("forcing norm on A = {norm_a:e}"));
    Ok(r)
}

/// n/|B^{n−1}₁|: the cone over a convex set of diameter d with apex height t
/// has a slope set containing a cone of measure ≥ tⁿ/(C dist·d^{n−1}).
pub fn aleksandrov_constant(n: usize) -> f64 {
    n as f64 / unit_ball_volume(n - 1)
}

fn region_diameter(grid: &Grid, region: &Region, nodes: &[usize]) -> f64 {
    match region {
        Region::Ball { radius, .. } | Region::ClosedBall { radius, .. } => 2.0 * radius,
        Region::Cube { side, .. } => side * (grid.dim() as f64).sqrt(),
        _ => {
            let pts: Vec<Point> = nodes.iter().map(|&i| grid.point(i)).collect();
            let mut best = 0.0f64;
            for a in 0..pts.len() {
                for b in a + 1..pts.len() {
                    best = best.max(crate::grid::dist2(&pts[a], &pts[b]));
                }
            }
            best.sqrt()
        }
    }
}

/// sup |u|ⁿ/dist(x, ∂Ω) ≤ C_impl·diam(Ω)^{n−1}·Σ det(D²u)₊ hⁿ for convex u
/// vanishing on ∂Ω. `convexity_tol` bounds how negative a discrete Hessian
/// eigenvalue may be.
pub fn aleksandrov_check(field: &ScalarField, domain: &Region, convexity_tol: f64) -> Result<CheckReport> {
    let g = field.grid();
    let n = g.dim();
    let nodes = domain.nonempty_nodes(g)?;
    let hessians: Vec<Option<SymMatrix>> = nodes.par_iter().map(|&i| hessian_at(field, i)).collect();
    let worst = hessians.iter().flatten().map(|m| m.min_eigenvalue()).fold(f64::INFINITY, f64::min);
    if worst < -convexity_tol {
        return Err(LabError::Hypothesis(format!("convexity violated: min eigenvalue {worst:e}")));
    }
    let mut lhs = 0.0f64;
    for &i in &nodes {
        let p = g.point(i);
        let d = match domain.boundary_distance(&p) {
            Some(d) => d,
            None => return invalid("domain needs a closed-form boundary distance"),
        };
        if d > 0.0 {
            lhs = lhs.max(field.at(i).abs().powi(n as i32) / d);
        }
    }
    let mass: f64 = hessians.iter().flatten().map(|m| m.det().max(0.0)).sum::<f64>() * g.cell_volume();
    let diam = region_diameter(g, domain, &nodes);
    let c_impl = aleksandrov_constant(n);
    let rhs = c_impl * diam.powi(n as i32 - 1) * mass;
    let mut r = CheckReport::new("aleksandrov", lhs, rhs, 1e-12 * lhs.max(1.0), g)
        .with_constants(EstimateConstants { c: Some(c_impl), ..Default::default() });
    r.note(format!("Monge-Ampere mass = {mass:e}, diam = {diam}"));
    r.note(format!("min Hessian eigenvalue = {worst:e}"));
    Ok(r)
}

/// Contact set of concave paraboloids of opening M over the whole grid, with
/// the bound λ_min(D²u) ≥ −M at interior contact points.
/// The report has lhs = −min λ_min over interior contacts and rhs = M.
pub fn hessian_contact_set(field: &ScalarField, m: f64, center_set: &Region) -> Result<(ContactSet, CheckReport)> {
    let family: Family = ParaboloidFamily::concave(m, center_set.clone())?.into();
    let contact = contact_set(field, &family, &Region::All)?;
    let g = field.grid();
    let interior = contact.interior_points();
    let worst = interior
        .iter()
        .filter_map(|&i| hessian_at(field, i))
        .map(|h| h.min_eigenvalue())
        .fold(f64::INFINITY, f64::min);
    let lhs = if interior.is_empty() { f64::NEG_INFINITY } else { -worst };
    let tol = hessian_contact_tolerance(m, g.h());
    let mut r = CheckReport::new("hessian_contact", lhs, m, tol, g)
        .with_constants(EstimateConstants { m: Some(m), ..Default::default() });
    r.note(format!("interior contacts = {}, boundary contacts = {}", interior.len(), contact.boundary_contacts()));
    Ok((contact, r))
}

/// Rounding allowance for the eigenvalue bound at discrete contacts.
pub fn hessian_contact_tolerance(m: f64, h: f64) -> f64 {
    let _ = h;
    1e-9 * (1.0 + m)
}

/// Semiconvex test field: the sup-convolution of `noise` with parameter eps,
/// so D²u ≥ −1/eps.
pub fn semiconvex_field(noise: &ScalarField, eps: f64) -> Result<ScalarField> {
    sup_convolution(noise, eps)
}

/// Random convex field vanishing on the sphere of a random ball Ω ⊂ B_{9/10}:
/// u = s·Σᵢ wᵢ(|x − z|^{pᵢ}/R^{pᵢ} − 1) with one to three terms, pᵢ ∈ [3/2, 4].
/// u ≥ 0 outside Ω, so it also meets the boundary hypothesis on B₁.
pub fn random_convex_field(grid: &Grid, seed: u64) -> Result<(ScalarField, Region)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = grid.dim();
    let radius = rng.gen_range(0.4..0.6);
    let reach = 0.9 - radius;
    let mut center = [0.0; 3];
    loop {
        for c in center.iter_mut().take(n) {
            *c = rng.gen_range(-reach..reach);
        }
        if norm(&center) <= reach {
            break;
        }
    }
    let terms: Vec<(f64, f64)> = (0..rng.gen_range(1..=3))
        .map(|_| (rng.gen_range(0.2..1.0), rng.gen_range(1.5..4.0)))
        .collect();
    let s = rng.gen_range(0.5..2.0);
    let field = ScalarField::from_fn(grid, |x| {
        let r = crate::grid::dist2(x, &center).sqrt() / radius;
        s * terms.iter().map(|(w, p)| w * (r.powf(*p) - 1.0)).sum::<f64>()
    })?;
    Ok((field, Region::ball(center, radius)))
}
