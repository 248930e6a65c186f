//! Lattice random walks and the probabilistic Harnack check.

use super::iterate::{BoundaryData, SolverConfig};
use super::poisson::solve_poisson;
use crate::error::{invalid, LabError, Result};
use crate::grid::{Grid, Point, Region, ScalarField};
use crate::report::{CheckReport, EstimateConstants};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub max_steps: usize,
}

impl WalkConfig {
    pub fn new(n_samples: usize, seed: u64) -> WalkConfig {
        WalkConfig { n_samples, seed, max_steps: 1_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingEstimate {
    pub probability: f64,
    /// 1.96·sqrt(p(1−p)/n)
    pub halfwidth: f64,
    pub hits: usize,
    /// walks stopped at max_steps (counted as misses)
    pub capped: usize,
    pub samples: usize,
    /// the start lies in the target
    pub trivial: bool,
}

impl HittingEstimate {
    pub fn capped_fraction(&self) -> f64 {
        self.capped as f64 / self.samples.max(1) as f64
    }
}

enum Outcome {
    Hit,
    Exit,
    Capped,
}

/// Fraction of nearest-neighbor walks from `start` that enter `target`
/// before leaving `domain`. Walk w uses ChaCha8 stream w of `seed`, so the
/// tally does not depend on how walks are scheduled.
pub fn random_walk_hitting(
    grid: &Grid,
    domain: &Region,
    target: &Region,
    start: &Point,
    cfg: &WalkConfig,
) -> Result<HittingEstimate> {
    if cfg.n_samples == 0 {
        return invalid("n_samples must be at least 1");
    }
    let s = grid
        .locate(start)
        .ok_or_else(|| LabError::InvalidParameter("start must be a grid node".into()))?;
    let in_target = target.mask(grid);
    if in_target[s] {
        return Ok(HittingEstimate {
            probability: 1.0,
            halfwidth: 0.0,
            hits: cfg.n_samples,
            capped: 0,
            samples: cfg.n_samples,
            trivial: true,
        });
    }
    let in_domain = domain.mask(grid);
    if !in_domain[s] {
        return invalid("start must lie in the domain");
    }
    let n = grid.dim();
    let start_ijk = grid.multi(s);
    let walk = |w: usize| -> Outcome {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(w as u64);
        let mut ijk = start_ijk;
        for _ in 0..cfg.max_steps {
            let d: usize = rng.gen_range(0..2 * n);
            let mut off = [0isize; 3];
            off[d / 2] = if d % 2 == 0 { 1 } else { -1 };
            match grid.shift(ijk, off) {
                None => return Outcome::Exit,
                Some(next) => {
                    let i = grid.index(next);
                    if in_target[i] {
                        return Outcome::Hit;
                    }
                    if !in_domain[i] {
                        return Outcome::Exit;
                    }
                    ijk = next;
                }
            }
        }
        Outcome::Capped
    };
    let (hits, capped) = (0..cfg.n_samples)
        .into_par_iter()
        .map(|w| match walk(w) {
            Outcome::Hit => (1usize, 0usize),
            Outcome::Exit => (0, 0),
            Outcome::Capped => (0, 1),
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let p = hits as f64 / cfg.n_samples as f64;
    Ok(HittingEstimate {
        probability: p,
        halfwidth: 1.96 * (p * (1.0 - p) / cfg.n_samples as f64).sqrt(),
        hits,
        capped,
        samples: cfg.n_samples,
        trivial: false,
    })
}

/// The walk's exact hitting probability: v = 1 on target nodes, 0 off the
/// domain, discrete harmonic in between.
pub fn discrete_hitting_probability(grid: &Grid, domain: &Region, target: &Region) -> Result<ScalarField> {
    let t = target.mask(grid);
    let g = BoundaryData::from_field(ScalarField::new(
        grid.clone(),
        t.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
    )?)?;
    let free = domain.clone().minus(Region::from_mask(grid, t));
    let f = ScalarField::constant(grid, 0.0)?;
    let cfg = SolverConfig { tolerance: 1e-10, ..Default::default() };
    Ok(solve_poisson(&free, &f, &g, &cfg)?.field)
}

/// Pinned c in min_{B̄_{1/3}} v ≥ c |A ∩ B_ρ|. The quarter, half and
/// three-quarter ball family at ρ = 1/4, h = 1/16 gives ratios of 4.2 and up.
pub const PROB_HARNACK_C: f64 = 2.0;

/// Least number of walks per start.
pub const MIN_WALKS: usize = 100;

/// Starting net: nodes of B̄_{1/3} on the sub-lattice of spacing 1/6 (snapped).
fn start_net(grid: &Grid) -> Vec<Point> {
    let mut out = Vec::new();
    let step = 1.0 / 6.0;
    let k = 2i32;
    let n = grid.dim();
    let range = |a: usize| if a < n { -k..=k } else { 0..=0 };
    for i in range(0) {
        for j in range(1) {
            for l in range(2) {
                let p = [i as f64 * step, j as f64 * step, l as f64 * step];
                if (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() <= 1.0 / 3.0 + 1e-12 {
                    out.push(grid.point(grid.nearest(&p)));
                }
            }
        }
    }
    out.dedup();
    out
}

/// min over a net of B̄_{1/3} of the estimated v_{ρ,A} against c |A ∩ B_ρ|.
///
/// lhs = c·|A ∩ B_ρ|, rhs = smallest estimate, tolerance = 3 halfwidths
/// at that start. More than 1% capped walks fails the check.
pub fn probabilistic_harnack_check(
    grid: &Grid,
    rho: f64,
    a: &Region,
    n_samples: usize,
    seed: u64,
    c: Option<f64>,
) -> Result<CheckReport> {
    if !(rho > 0.0 && rho < 1.0 / 3.0) {
        return invalid("rho must lie in (0, 1/3)");
    }
    if n_samples < MIN_WALKS {
        return invalid(format!("at least {MIN_WALKS} walks per start are needed"));
    }
    if !grid.covers_box(&[0.0; 3], 1.0 + grid.h()) {
        return Err(LabError::OutsideGrid("grid must cover B1".into()));
    }
    let target = a.clone().intersect(Region::closed_ball([0.0; 3], rho));
    let measure = target.measure(grid);
    let domain = Region::ball([0.0; 3], 1.0);
    let cfg = WalkConfig::new(n_samples, seed);
    let mut worst: Option<(Point, HittingEstimate)> = None;
    let mut capped = 0usize;
    let mut total = 0usize;
    for p in start_net(grid) {
        let est = random_walk_hitting(grid, &domain, &target, &p, &cfg)?;
        capped += est.capped;
        total += est.samples;
        if worst.as_ref().map_or(true, |(_, w)| est.probability < w.probability) {
            worst = Some((p, est));
        }
    }
    let (p, est) = worst.ok_or(LabError::EmptyRegion)?;
    if capped as f64 > 0.01 * total as f64 {
        return Err(LabError::Hypothesis(format!("{capped} of {total} walks capped (over 1%)")));
    }
    let c = c.unwrap_or(PROB_HARNACK_C);
    let mut rep = CheckReport::new("probabilistic_harnack", c * measure, est.probability, 3.0 * est.halfwidth, grid)
        .with_constants(EstimateConstants { rho: Some(rho), c: Some(c), ..Default::default() })
        .with_seed(seed);
    rep.note(format!(
        "|A ∩ B_rho| = {measure:e}, min estimate {:e} at ({}, {}, {}), capped = {capped}",
        est.probability, p[0], p[1], p[2]
    ));
    Ok(rep)
}
