//! Registered verification suites. Each check turns one family of library
//! estimates into `CheckReport`s; a suite is an ordered list of checks.

use crate::oracles::{
    gaussian_oracle, harmonic_fields, positive_harmonic_fields, random_convex_region, random_symmetric, sampled_pucci,
};
use anyhow::{bail, Result};
use kslab::contact::*;
use kslab::coverings::*;
use kslab::grid::{norm, Grid, Region, ScalarField};
use kslab::operators::{fractional_laplacian_at, pucci, Ellipticity, FractionalParams, PucciSign, TailSpec};
use kslab::pt;
use kslab::regularity::*;
use kslab::report::GridSummary;
use kslab::solvers::*;
use kslab::CheckReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Parameters shared by every check of a run.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub h: Option<f64>,
    pub dim: Option<usize>,
    pub ell: Ellipticity,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
}

impl Ctx {
    fn h(&self, default: f64) -> f64 {
        self.h.unwrap_or(default)
    }

    fn dim(&self, default: usize) -> usize {
        self.dim.unwrap_or(default)
    }

    fn num(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn count(&self, key: &str, default: usize) -> usize {
        self.params.get(key).map(|v| *v as usize).unwrap_or(default)
    }

    /// A bound: the named parameter, else the global `tolerance`, else the default.
    fn tol(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).or_else(|| self.params.get("tolerance")).copied().unwrap_or(default)
    }

    /// Per-check seeds are offsets from `--seed`.
    fn seed(&self, base: u64) -> u64 {
        self.seed.wrapping_add(base)
    }

    /// Applies a tolerance override to a library report.
    fn adjust(&self, rep: CheckReport, key: &str) -> CheckReport {
        match self.params.get(key).or_else(|| self.params.get("tolerance")) {
            Some(&t) => retolerance(rep, t),
            None => rep,
        }
    }

    /// Like `adjust`, with a default that replaces the library tolerance.
    fn adjust_or(&self, rep: CheckReport, key: &str, default: f64) -> CheckReport {
        retolerance(rep, self.tol(key, default))
    }
}

fn retolerance(mut rep: CheckReport, t: f64) -> CheckReport {
    rep.tolerance = t;
    rep.pass = rep.margin >= -t;
    rep
}

fn summary(g: &Grid) -> GridSummary {
    GridSummary { h: g.h(), dim: g.dim() }
}

/// Grid-free checks report h = 0, dim = 0.
const NO_GRID: GridSummary = GridSummary { h: 0.0, dim: 0 };

/// `value ≤ bound`.
fn measured(name: impl AsRef<str>, value: f64, bound: f64, grid: GridSummary) -> CheckReport {
    CheckReport::with_summary(name.as_ref(), value, bound, 0.0, grid)
}

/// `required ≤ value`.
fn at_least(name: impl AsRef<str>, required: f64, value: f64, grid: GridSummary) -> CheckReport {
    CheckReport::with_summary(name.as_ref(), required, value, 0.0, grid)
}

fn named(mut rep: CheckReport, name: impl Into<String>) -> CheckReport {
    rep.name = name.into();
    rep
}

type CheckFn = fn(&Ctx) -> Result<Vec<CheckReport>>;

pub struct Check {
    pub name: &'static str,
    /// `--suite-param` keys this check reads (besides `tolerance`)
    pub keys: &'static [&'static str],
    pub run: CheckFn,
}

macro_rules! check {
    ($name:expr, [$($k:expr),*], $f:path) => {
        Check { name: $name, keys: &[$($k),*], run: $f }
    };
}

const LAPLACIAN_CORE: &[Check] = &[
    check!("mean-value", ["mean_value_tol", "min_order", "radius"], mean_value),
    check!("harnack-quotient", ["harmonic_gate", "harnack_tol"], harnack_quotient),
    check!("weak-harnack-laplacian", ["weak_harnack_tol"], weak_harnack_laplacian),
    check!("decay-engine", ["lemma_rel", "decay_tol"], decay_engine),
    check!("holder-fit", ["fit_rel", "log_fit", "log_alpha"], holder_fit),
];

const UNIFORMLY_ELLIPTIC_CORE: &[Check] = &[
    check!("pucci-oracle", ["matrices", "samples", "pucci_gap", "pucci_rounding"], pucci_oracle),
    check!("weak-harnack-distribution", ["members", "distribution_tol", "harnack_ue_tol"], weak_harnack_distribution),
    check!("measure-estimate", ["delta", "measure_tol"], measure_estimate),
];

const CONTACT_GEOMETRY: &[Check] = &[
    check!("inf-convolution", ["brute_tol", "huber_tol", "semigroup_tol"], inf_convolutions),
    check!("contact-pipeline", ["fields", "count_tol", "area_tol"], contact_pipeline),
    check!("abp-aleksandrov", ["convex_fields", "h3", "abp_tol"], abp_aleksandrov),
];

const COVERINGS: &[Check] = &[
    check!("dyadic-interval", ["depth"], dyadic_interval),
    check!("dyadic-random", ["regions"], dyadic_random),
    check!("vitali", ["sets"], vitali),
    check!("stacking", ["sets"], stacking_sets),
    check!("sun-rising", ["m", "sun_tol"], sun_rising_fields),
];

const FRACTIONAL: &[Check] = &[check!(
    "fractional-laplacian",
    ["linear_tol", "frac_rel", "sigma", "dilation_tol"],
    fractional
)];

const PROBABILISTIC: &[Check] = &[
    check!("walk-oracle", ["walks", "sigmas"], walk_oracle),
    check!("probabilistic-harnack", ["family_h", "family_walks", "prob_tol"], probabilistic_family),
];

const HESSIAN_ESTIMATES: &[Check] =
    &[check!("hessian-second-differences", ["members", "hessian_tol"], hessian_second_differences)];

pub const SUITES: &[(&str, &[Check])] = &[
    ("laplacian-core", LAPLACIAN_CORE),
    ("uniformly-elliptic-core", UNIFORMLY_ELLIPTIC_CORE),
    ("contact-geometry", CONTACT_GEOMETRY),
    ("coverings", COVERINGS),
    ("fractional", FRACTIONAL),
    ("probabilistic", PROBABILISTIC),
    ("hessian-estimates", HESSIAN_ESTIMATES),
];

pub const SUITE_NAMES: &[&str] = &[
    "laplacian-core",
    "uniformly-elliptic-core",
    "contact-geometry",
    "coverings",
    "fractional",
    "probabilistic",
    "hessian-estimates",
    "full",
];

/// Checks of a suite in registration order; `full` runs every suite.
pub fn lookup(name: &str) -> Option<Vec<&'static Check>> {
    if name == "full" {
        return Some(SUITES.iter().flat_map(|(_, c)| c.iter()).collect());
    }
    SUITES.iter().find(|(n, _)| *n == name).map(|(_, c)| c.iter().collect())
}

/// Rejects parameter keys no check of the suite reads.
pub fn validate_keys(checks: &[&Check], params: &BTreeMap<String, f64>) -> Result<()> {
    for key in params.keys() {
        if key != "tolerance" && !checks.iter().any(|c| c.keys.contains(&key.as_str())) {
            let mut known: Vec<&str> = checks.iter().flat_map(|c| c.keys.iter().copied()).collect();
            known.sort_unstable();
            known.dedup();
            bail!("unknown suite parameter '{key}' (known: tolerance, {})", known.join(", "));
        }
    }
    Ok(())
}

/// Runs the checks in parallel; results keep registration order.
pub fn run_checks(checks: &[&Check], ctx: &Ctx) -> Result<Vec<(&'static str, Vec<CheckReport>)>> {
    checks
        .par_iter()
        .map(|c| match (c.run)(ctx) {
            Ok(r) => Ok((c.name, r)),
            Err(e) => Err(e.context(format!("check {}", c.name))),
        })
        .collect()
}

// laplacian-core ----------------------------------------------------------

fn mean_value(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let dim = ctx.dim(2);
    let h = ctx.h(1.0 / 128.0);
    let r = ctx.num("radius", 0.5);
    let bound = ctx.tol("mean_value_tol", 5.0 * h);
    let min_order = ctx.num("min_order", 1.0);
    let center = pt(&[0.1, -0.05]);
    let deviations = |g: &Grid| -> Result<Vec<(String, f64)>> {
        let c = g.point(g.nearest(&center));
        let mut out = Vec::new();
        for (name, u) in harmonic_fields(g)? {
            out.push((name, (ball_average(&u, &c, r)? - u.at(g.nearest(&c))).abs()));
        }
        Ok(out)
    };
    let fine = Grid::cube(dim, h, 1.0)?;
    let coarse = Grid::cube(dim, 4.0 * h, 1.0)?;
    let (df, dc) = (deviations(&fine)?, deviations(&coarse)?);
    let mut reps = Vec::new();
    for ((name, f), (_, c)) in df.iter().zip(&dc) {
        reps.push(measured(format!("|avg - u(x0)| {name}"), *f, bound, summary(&fine)));
        // below rounding there is no order to measure
        if *f > 1e-12 && *c > 1e-12 {
            reps.push(at_least(format!("order {name}"), min_order, (c / f).log2() / 2.0, summary(&fine)));
        }
    }
    Ok(reps)
}

fn harnack_quotient(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let h = ctx.h(1.0 / 128.0);
    let g = Grid::cube(ctx.dim(2), h, 1.0 + 2.0 * h)?;
    let gate = ctx.num("harmonic_gate", 1e-2);
    let mut reps = Vec::new();
    for (name, u) in positive_harmonic_fields(&g)? {
        for r in [0.125, 0.25] {
            let rep = harnack_quotient_check(&u, r, gate)?;
            reps.push(ctx.adjust(named(rep, format!("sup/inf {name} r={r}")), "harnack_tol"));
        }
    }
    Ok(reps)
}

fn weak_harnack_laplacian(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let h = ctx.h(1.0 / 64.0);
    let g = Grid::cube(ctx.dim(2), h, 1.0 + 2.0 * h)?;
    let mut reps = Vec::new();
    for (name, u) in positive_harmonic_fields(&g)? {
        let rep = weak_harnack_laplacian_check(&u, 2.0)?;
        reps.push(ctx.adjust(named(rep, format!("weak harnack {name}")), "weak_harnack_tol"));
    }
    Ok(reps)
}

fn decay_engine(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let rel = ctx.tol("lemma_rel", 4.0 * f64::EPSILON);
    let mut reps = Vec::new();
    for (theta, rho) in [(0.25, 0.5), (0.5, 0.5), (0.1, 0.5), (0.75, 0.5), (0.3, 0.25)] {
        let osc: Vec<f64> = (0..12).map(|k| (1.0f64 - theta).powi(k)).collect();
        let p = DecayProfile::from_values(pt(&[0.0, 0.0]), rho, 1.0, osc)?;
        let tag = format!("θ={theta} ρ={rho}");
        let rep = decay_implies_modulus_check(&p, theta)?;
        reps.push(ctx.adjust(named(rep, format!("geometric profile {tag}")), "decay_tol"));
        let (a, c) = holder_from_decay(theta, rho)?;
        let (a0, c0) = ((1.0f64 - theta).ln() / rho.ln(), 1.0 / (1.0 - theta));
        reps.push(measured(format!("α relative error {tag}"), (a - a0).abs() / a0, rel, NO_GRID));
        reps.push(measured(format!("C relative error {tag}"), (c - c0).abs() / c0, rel, NO_GRID));
    }
    Ok(reps)
}

fn holder_fit(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let g = Grid::cube(ctx.dim(2), ctx.h(1.0 / 256.0), 1.0)?;
    let o = [0.0; 3];
    let rel = ctx.tol("fit_rel", 0.05);
    let mut reps = Vec::new();
    for alpha in [0.3, 0.5, 0.7, 1.0] {
        let u = ScalarField::from_fn(&g, |p| norm(p).powf(alpha))?;
        let (a, _) = fit_holder_exponent(&oscillation_profile(&u, &o, 0.5, 1.0, 6)?)?;
        reps.push(measured(format!("|x|^{alpha} fit relative error"), (a - alpha).abs() / alpha, rel, summary(&g)));
    }
    let line = Grid::cube(1, 1.0 / 4096.0, 1.0)?;
    let alpha = ctx.num("log_alpha", 0.1);
    let lf = field_library("log_counterexample", &line, &FieldParams::new().with("alpha", alpha))?;
    let (a, _) = fit_holder_exponent(&oscillation_profile(&lf.field, &o, 0.5, 0.5, 8)?)?;
    reps.push(measured(format!("log counterexample α={alpha} fitted exponent"), a, ctx.tol("log_fit", 0.05), summary(&line)));
    Ok(reps)
}

// uniformly-elliptic-core -------------------------------------------------

fn pucci_oracle(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let count = ctx.count("matrices", 200);
    let samples = ctx.count("samples", 10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(1));
    let mut gap = [0.0f64; 2];
    let mut beaten = [f64::NEG_INFINITY; 2];
    for k in 0..count {
        let n = ctx.dim.unwrap_or(2 + k % 2);
        let m = random_symmetric(&mut rng, n);
        for (s, sign) in [PucciSign::Minus, PucciSign::Plus].into_iter().enumerate() {
            let formula = pucci(&m, &ctx.ell, sign);
            let sampled = sampled_pucci(&m, &ctx.ell, sign, samples, &mut rng);
            let g = if s == 0 { sampled - formula } else { formula - sampled };
            gap[s] = gap[s].max(g);
            beaten[s] = beaten[s].max(-g);
        }
    }
    let mut reps = Vec::new();
    for (s, label) in ["P-", "P+"].into_iter().enumerate() {
        reps.push(measured(format!("{label}: sampled extremum gap"), gap[s], ctx.tol("pucci_gap", 1e-4), NO_GRID));
        reps.push(measured(
            format!("{label}: largest excess of a sample over the formula"),
            beaten[s],
            ctx.tol("pucci_rounding", 1e-12),
            NO_GRID,
        ));
    }
    Ok(reps)
}

fn weak_harnack_distribution(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let fam = spike_supersolutions(ctx.h(1.0 / 16.0), &ctx.ell, ctx.seed(11), ctx.count("members", 10))?;
    let mut reps = Vec::new();
    for (k, s) in fam.iter().enumerate() {
        let (rep, _) = weak_harnack_ue_check(&s.field, &ctx.ell, WEAK_HARNACK_ETA, WEAK_HARNACK_M)?;
        reps.push(ctx.adjust(named(rep, format!("distribution bound, member {k}")), "distribution_tol"));
        let rep = harnack_ue_check(&s.field, &ctx.ell, None)?;
        reps.push(ctx.adjust(named(rep, format!("harnack, member {k}")), "harnack_ue_tol"));
    }
    Ok(reps)
}

fn measure_estimate(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let g = Grid::cube(ctx.dim(2), ctx.h(1.0 / 32.0), 1.0)?;
    let u = ScalarField::constant(&g, 0.0)?;
    let rep = measure_estimate_check(&u, &ctx.ell, ctx.num("delta", 0.1))?;
    Ok(vec![ctx.adjust(named(rep, "measure estimate, u = 0"), "measure_tol")])
}

// contact-geometry --------------------------------------------------------

fn brute_inf_convolution(u: &ScalarField, eps: f64) -> Vec<f64> {
    let g = u.grid();
    let c = g.h() * g.h() / (2.0 * eps);
    (0..g.len())
        .map(|j| {
            let mj = g.multi(j);
            (0..g.len())
                .map(|i| {
                    let mi = g.multi(i);
                    let mut v = u.at(i);
                    for a in 0..g.dim() {
                        let d = mi[a] as f64 - mj[a] as f64;
                        v += c * (d * d);
                    }
                    v
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn inf_convolutions(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let mut reps = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(6));
    for (dim, n) in [(1usize, 64usize), (2, 40)] {
        let g = Grid::new(dim, 1.0 / 32.0, &vec![-1.0; dim], &vec![n; dim])?;
        for eps in [0.01, 0.1, 1.0] {
            let u = ScalarField::new(g.clone(), (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
            let fast = inf_convolution(&u, eps)?;
            let brute = brute_inf_convolution(&u, eps);
            let diff = fast.values().iter().zip(&brute).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            reps.push(measured(format!("envelope vs brute force, {dim}D ε={eps}"), diff, ctx.tol("brute_tol", 0.0), summary(&g)));
        }
    }
    let h = ctx.h(1.0 / 256.0);
    let line = Grid::cube(1, h, 1.0)?;
    let abs = ScalarField::from_fn(&line, |p| p[0].abs())?;
    for eps in [0.05, 0.2] {
        let env = inf_convolution(&abs, eps)?;
        let mut worst = 0.0f64;
        for i in 0..line.len() {
            let x = line.point(i)[0].abs();
            if x <= 1.0 - eps {
                let exact = if x <= eps { x * x / (2.0 * eps) } else { x - eps / 2.0 };
                worst = worst.max((env.at(i) - exact).abs());
            }
        }
        reps.push(measured(format!("Huber deviation ε={eps}"), worst, ctx.tol("huber_tol", h), summary(&line)));
    }
    let h = ctx.h(1.0 / 64.0);
    let g = Grid::cube(2, h, 1.0)?;
    let u = ScalarField::from_fn(&g, |p| (4.0 * p[0]).cos() + p[1].abs())?;
    for (a1, a2) in [(20.0, 10.0), (5.0, 3.0), (50.0, 50.0)] {
        let twice = inf_convolution(&inf_convolution(&u, 1.0 / a1)?, 1.0 / a2)?;
        let once = inf_convolution(&u, 1.0 / a1 + 1.0 / a2)?;
        let worst = (0..g.len()).map(|i| (twice.at(i) - once.at(i)).abs()).fold(0.0, f64::max);
        let bound = ctx.tol("semigroup_tol", 2.0 * h * h * (a1 + a2));
        reps.push(measured(format!("semigroup α=({a1},{a2})"), worst, bound, summary(&g)));
    }
    Ok(reps)
}

/// Concave paraboloids of opening 1 with vertices in B_{1/4}.
pub fn measure_family() -> Result<Family> {
    Ok(ParaboloidFamily::new(1.0, ParaboloidSign::Concave, Region::ball([0.0; 3], 0.25), 0.5 * 0.75 * 0.75)?.into())
}

fn contact_pipeline(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let fam = measure_family()?;
    let centers = Region::ball([0.0; 3], 0.25);
    let unit = Region::ball([0.0; 3], 1.0);
    let mut reps = Vec::new();
    let h = ctx.h(1.0 / 64.0);
    let g = Grid::cube(2, h, 1.0)?;
    let zero = ScalarField::constant(&g, 0.0)?;
    let cs = contact_set(&zero, &fam, &unit)?;
    let (got, want) = (cs.contact_points(), centers.nodes(&g));
    let mismatched = got.iter().filter(|i| !want.contains(i)).count() + want.iter().filter(|i| !got.contains(i)).count();
    reps.push(measured("u = 0: nodes off B_1/4 in the contact set", mismatched as f64, 0.0, summary(&g)));
    let tr = transport_map(&cs, &zero, &fam)?;
    reps.push(ctx.adjust(named(area_formula_check(&cs, &tr, &centers)?, "u = 0: area formula"), "area_tol"));
    let raw = tr.entries.iter().filter(|e| centers.contains(&e.image)).map(|e| e.det).sum::<f64>() * g.cell_volume();
    let err = (raw - std::f64::consts::PI / 16.0).abs();
    reps.push(measured("u = 0: |Σ det - π/16|", err, ctx.tol("count_tol", 4.0 * h), summary(&g)));

    let g = Grid::cube(2, 1.0 / 48.0, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(7));
    for k in 0..ctx.count("fields", 50) {
        let noise = ScalarField::new(g.clone(), (0..g.len()).map(|_| rng.gen_range(0.0..0.08)).collect())?;
        let u = semiconvex_field(&noise, 2.0)?;
        let cs = contact_set(&u, &fam, &unit)?;
        let tr = transport_map(&cs, &u, &fam)?;
        let rep = area_formula_check(&cs, &tr, &centers)?;
        reps.push(ctx.adjust_or(named(rep, format!("semiconvex field {k}: area formula")), "area_tol", 0.0));
    }
    Ok(reps)
}

fn abp_aleksandrov(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let h2 = ctx.h(1.0 / 64.0);
    let h3 = ctx.num("h3", 1.0 / 24.0);
    let mut reps = Vec::new();
    for (dim, h) in [(2usize, h2), (3, h3)] {
        let g = Grid::cube(dim, h, 1.0 + 2.0 * h)?;
        let u = ScalarField::from_fn(&g, |p| norm(p).powi(2) - 1.0)?;
        reps.push(named(abp_bound(&u, &ctx.ell, None)?, format!("abp |x|^2-1, {dim}D")));
        reps.push(named(aleksandrov_check(&u, &Region::ball([0.0; 3], 1.0), 1e-9)?, format!("aleksandrov |x|^2-1, {dim}D")));
    }
    let g = Grid::cube(2, h2, 1.0 + 2.0 * h2)?;
    for k in 0..ctx.count("convex_fields", 20) as u64 {
        let (u, dom) = random_convex_field(&g, ctx.seed(k))?;
        reps.push(named(abp_bound(&u, &ctx.ell, None)?, format!("abp convex field {k}")));
        reps.push(named(aleksandrov_check(&u, &dom, 1e-9)?, format!("aleksandrov convex field {k}")));
    }
    Ok(reps.into_iter().map(|r| ctx.adjust(r, "abp_tol")).collect())
}

// coverings ---------------------------------------------------------------

/// (0, 1/2] on the line.
pub fn half_interval() -> Region {
    Region::open_half_space([-1.0, 0.0, 0.0], 0.0).intersect(Region::half_space([1.0, 0.0, 0.0], 0.5))
}

fn dyadic_interval(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let depth = ctx.count("depth", 10) as u32;
    let d = dyadic_decomposition(&half_interval(), 1, depth)?;
    // one cube per generation k+1 ≥ 2, hugging the open end at 0
    let expected: Vec<DyadicCube> =
        (1..=depth).map(|k| DyadicCube { k: k + 1, coords: [(1u64 << k) + 1, 0, 0] }).collect();
    let wrong = d.cubes.iter().filter(|c| !expected.contains(c)).count()
        + expected.iter().filter(|c| !d.cubes.contains(c)).count();
    Ok(vec![measured(format!("(0,1/2] cubes differing from the closed form, depth {depth}"), wrong as f64, 0.0, NO_GRID)])
}

fn dyadic_random(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(42));
    let (mut overlaps, mut outside, mut witness) = (0usize, 0usize, 0usize);
    let regions = ctx.count("regions", 100);
    for trial in 0..regions {
        let dim = 1 + trial % 3;
        let e = random_convex_region(&mut rng, dim);
        let d = dyadic_decomposition(&e, dim, [9, 6, 3][dim - 1])?;
        overlaps += usize::from(!d.pairwise_disjoint());
        for (c, w) in d.cubes.iter().zip(&d.witnesses) {
            if classify(&e, c, dim)? != Relation::Inside {
                outside += 1;
            }
            let ok = match (c.parent(), w) {
                (None, None) => true,
                (Some(p), Some(w)) => (0..dim).all(|a| w[a] >= p.lower(a) && w[a] <= p.upper(a)) && !e.contains(w),
                _ => false,
            };
            witness += usize::from(!ok);
        }
    }
    Ok(vec![
        measured(format!("{regions} regions: overlapping decompositions"), overlaps as f64, 0.0, NO_GRID),
        measured(format!("{regions} regions: cubes not inside E"), outside as f64, 0.0, NO_GRID),
        measured(format!("{regions} regions: cubes without a progenitor witness"), witness as f64, 0.0, NO_GRID),
    ])
}

fn vitali(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(11));
    let sets = ctx.count("sets", 100);
    let mut bad = 0usize;
    for trial in 0..sets {
        let dim = 1 + trial % 3;
        let balls: Vec<Ball> = (0..60)
            .map(|_| {
                let mut c = [0.0; 3];
                for v in c.iter_mut().take(dim) {
                    *v = rng.gen_range(-1.0..1.0);
                }
                Ball { center: c, radius: rng.gen_range(0.01..0.3) }
            })
            .collect();
        let s = vitali_select(&balls, dim)?;
        bad += usize::from(!(s.disjoint() && s.five_times_coverage()));
    }
    Ok(vec![measured(format!("{sets} sets: selections not disjoint or not 5x covering"), bad as f64, 0.0, NO_GRID)])
}

fn stacking_sets(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(13));
    let sets = 10 * ctx.count("sets", 100);
    let (mut bad, mut loose) = (0usize, 0usize);
    for trial in 0..sets {
        let dim = 1 + trial % 2;
        let m = Rational::new(rng.gen_range(1..6), 1) + Rational::new(rng.gen_range(0..4), 4);
        let cyl: Vec<Cylinder> = (0..rng.gen_range(1..8))
            .map(|_| {
                let k = rng.gen_range(0..4u32);
                let mut coords = [0u64; 3];
                for c in coords.iter_mut().take(dim) {
                    *c = rng.gen_range(0..1u64 << k);
                }
                Cylinder { k, coords, slot: rng.gen_range(0..1u64 << (2 * k)) }
            })
            .collect();
        let r = stacking(&cyl, m, dim)?;
        bad += usize::from(!r.holds);
        if cyl.len() == 1 && r.stacked / r.total != m / (m + Rational::from_integer(1)) {
            loose += 1;
        }
    }
    Ok(vec![
        measured(format!("{sets} sets: ratio below m/(m+1)"), bad as f64, 0.0, NO_GRID),
        measured("single cylinders not attaining m/(m+1)", loose as f64, 0.0, NO_GRID),
    ])
}

fn sun_rising_fields(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let intervals = (1.0 / ctx.h(1.0 / 1024.0)).round() as usize;
    let g = Grid::unit_interval(intervals)?;
    let m = ctx.num("m", 20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(10));
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut reps = Vec::new();
    for k in 0..51 {
        let u = if k < 50 {
            let c: Vec<(f64, f64)> = (0..8).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            ScalarField::from_fn(&g, |p| {
                c.iter()
                    .enumerate()
                    .map(|(j, (a, b))| {
                        let j = (j + 1) as f64;
                        (a * (two_pi * j * p[0]).cos() + b * (two_pi * j * p[0]).sin()) / j
                    })
                    .sum()
            })?
        } else {
            ScalarField::from_fn(&g, |p| (two_pi * p[0]).sin())?
        };
        let s = sun_rising(&u, m)?;
        let label = if k < 50 { format!("Fourier field {k}") } else { "sine".into() };
        reps.push(ctx.adjust(named(s.report, format!("|S^m| {label}")), "sun_tol"));
    }
    Ok(reps)
}

// fractional --------------------------------------------------------------

fn fractional(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let mut reps = Vec::new();
    let plane = Grid::cube(2, 1.0 / 16.0, 2.0)?;
    let origin = plane.nearest(&pt(&[0.0, 0.0]));
    let lin = ScalarField::from_fn(&plane, |p| 0.3 * p[0] - 2.0 * p[1])?;
    let mut params = FractionalParams::new(0.8, 1.9);
    params.level = 2;
    let z = fractional_laplacian_at(&lin, origin, &params, &TailSpec::Zero)?;
    reps.push(measured("|(-Δ)^s| of a linear field", z.value.abs(), ctx.tol("linear_tol", 1e-9), summary(&plane)));
    let bump = ScalarField::from_fn(&plane, |p| 1.0 / (1.0 + 4.0 * (p[0] * p[0] + p[1] * p[1])))?;
    let top = fractional_laplacian_at(&bump, origin, &FractionalParams::new(1.2, 1.9), &TailSpec::Zero)?;
    reps.push(measured("integro-differential value at a strict maximum", top.value, 0.0, summary(&plane)));

    let h = ctx.h(1.0 / 64.0);
    let sigma = ctx.num("sigma", 1.0);
    let line = Grid::cube(1, h, 6.5)?;
    let u = ScalarField::from_fn(&line, |p| (-p[0] * p[0]).exp())?;
    let s = fractional_laplacian_at(&u, line.nearest(&pt(&[0.0])), &FractionalParams::new(sigma, 6.0), &TailSpec::Zero)?;
    let oracle = gaussian_oracle(sigma);
    let rel = (s.value - oracle).abs() / oracle.abs();
    reps.push(measured(format!("Gaussian vs quadrature oracle σ={sigma}"), rel, ctx.tol("frac_rel", 0.01), summary(&line)));

    let line = Grid::cube(1, h, 12.5)?;
    let sigma = 0.6;
    let params = FractionalParams::new(sigma, 12.0);
    let c = line.nearest(&pt(&[0.0]));
    let a = fractional_laplacian_at(&ScalarField::from_fn(&line, |p| (-p[0] * p[0]).exp())?, c, &params, &TailSpec::Zero)?;
    let b = fractional_laplacian_at(&ScalarField::from_fn(&line, |p| (-p[0] * p[0] / 4.0).exp())?, c, &params, &TailSpec::Zero)?;
    let ratio = b.value / a.value;
    let tol = (a.quadrature_error / a.value.abs() + b.quadrature_error / b.value.abs()).max(2e-3);
    reps.push(measured(
        "dilation by 2 scales by 2^-σ",
        (ratio - 2f64.powf(-sigma)).abs(),
        ctx.tol("dilation_tol", tol),
        summary(&line),
    ));
    Ok(reps)
}

// probabilistic -----------------------------------------------------------

fn walk_oracle(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let h = ctx.h(1.0 / 32.0);
    let g = Grid::cube(2, h, 1.0 + 2.0 * h)?;
    let target = Region::half_space([-1.0, 0.0, 0.0], 0.0).intersect(Region::closed_ball([0.0; 3], 0.25));
    let dom = Region::ball([0.0; 3], 1.0);
    let v = discrete_hitting_probability(&g, &dom, &target)?;
    let start = pt(&[-0.25, 0.25]);
    let walks = ctx.count("walks", 100_000);
    let est = random_walk_hitting(&g, &dom, &target, &start, &WalkConfig::new(walks, ctx.seed(3)))?;
    let Some(oracle) = v.at_point(&start) else { bail!("walk start is not a grid node") };
    let z = (est.probability - oracle).abs() / (est.halfwidth / 1.96);
    let rep = measured(format!("walk vs discrete oracle in binomial σ, {walks} walks"), z, ctx.tol("sigmas", 3.0), summary(&g));
    Ok(vec![rep.with_seed(ctx.seed(3))])
}

fn probabilistic_family(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let h = ctx.num("family_h", 1.0 / 16.0);
    let g = Grid::cube(2, h, 1.0 + 2.0 * h)?;
    let walks = ctx.count("family_walks", 20_000);
    let family = [
        ("quarter", Region::half_space([-1.0, 0.0, 0.0], 0.0).intersect(Region::half_space([0.0, -1.0, 0.0], 0.0))),
        ("half", Region::half_space([-1.0, 0.0, 0.0], 0.0)),
        (
            "three-quarter",
            Region::All.minus(
                Region::open_half_space([1.0, 0.0, 0.0], 0.0).intersect(Region::open_half_space([0.0, 1.0, 0.0], 0.0)),
            ),
        ),
    ];
    let mut reps = Vec::new();
    let mut mins = Vec::new();
    for (name, a) in &family {
        let rep = probabilistic_harnack_check(&g, 0.25, a, walks, ctx.seed(7), None)?;
        mins.push(rep.rhs);
        reps.push(ctx.adjust(named(rep, format!("min v ≥ c|A∩B|, {name}")), "prob_tol"));
    }
    let unordered = mins.windows(2).filter(|w| w[0] > w[1]).count();
    reps.push(measured("min v decreasing as A grows", unordered as f64, 0.0, summary(&g)));
    Ok(reps)
}

// hessian-estimates -------------------------------------------------------

fn hessian_second_differences(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let fam = pplus_solutions(ctx.h(1.0 / 64.0), &ctx.ell, ctx.seed(14), ctx.count("members", 10))?;
    let mut reps = Vec::new();
    for (k, s) in fam.iter().enumerate() {
        let (sup, bound) = hessian_second_difference_check(&s.field, &ctx.ell, s.residual, None)?;
        reps.push(ctx.adjust(named(sup, format!("P- supersolution, member {k}")), "hessian_tol"));
        reps.push(ctx.adjust(named(bound, format!("(v_2h)- ≤ C osc, member {k}")), "hessian_tol"));
    }
    Ok(reps)
}

/// Pinned constants reported with every run.
pub fn constants(ell: &Ellipticity) -> Result<BTreeMap<String, f64>> {
    let (eps, c) = weak_harnack_constants(WEAK_HARNACK_ETA, WEAK_HARNACK_M)?;
    let mut t = BTreeMap::new();
    for (k, v) in [
        ("abp_C_2d", abp_constant(ell, 2)),
        ("abp_C_3d", abp_constant(ell, 3)),
        ("aleksandrov_C_2d", aleksandrov_constant(2)),
        ("aleksandrov_C_3d", aleksandrov_constant(3)),
        ("measure_C_2d", measure_constant(ell, 2)),
        ("distribution_levels", DISTRIBUTION_LEVELS as f64),
        ("harnack_ue_C", HARNACK_UE_C),
        ("hessian_C", HESSIAN_C),
        ("local_max_pucci_C", LOCAL_MAX_PUCCI_C),
        ("min_walks", MIN_WALKS as f64),
        ("mollify_C", MOLLIFY_C),
        ("prob_harnack_c", PROB_HARNACK_C),
        ("weak_harnack_eta", WEAK_HARNACK_ETA),
        ("weak_harnack_M", WEAK_HARNACK_M),
        ("weak_harnack_epsilon", eps),
        ("weak_harnack_C", c),
    ] {
        t.insert(k.to_string(), v);
    }
    Ok(t)
}
