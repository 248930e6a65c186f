//! Seeded families of solved fields shared by tests, suites and the CLI.

use super::iterate::{BoundaryData, SolverConfig, SolverMode};
use super::pucci::solve_pucci;
use crate::error::Result;
use crate::grid::{Grid, Point, Region, ScalarField};
use crate::operators::{Ellipticity, PucciSign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// A solved field with the forcing it was solved with.
#[derive(Clone, Debug)]
pub struct SolvedField {
    pub field: ScalarField,
    /// right-hand side of the solved equation
    pub rhs: ScalarField,
    pub residual: f64,
    pub seed: u64,
}

/// Random positive trace 1 + Σ_k (a_k cos kθ + b_k sin kθ)/k², k ≤ 4, in 2D.
fn trace(rng: &mut ChaCha8Rng, amp: f64) -> impl Fn(&Point) -> f64 + Sync {
    let c: Vec<(f64, f64)> = (0..4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    move |p: &Point| {
        let t = p[1].atan2(p[0]);
        1.0 + amp
            * c.iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let k = (k + 1) as f64;
                    (a * (k * t).cos() + b * (k * t).sin()) / (k * k)
                })
                .sum::<f64>()
    }
}

fn nonlinear_cfg() -> SolverConfig {
    SolverConfig { tolerance: 1e-8, mode: SolverMode::NonlinearGaussSeidel, ..Default::default() }
}

/// 2D supersolutions of P⁻(D²u) = −s·exp(−|x−p|²/(2·0.1²)) on B_{3√2}
/// with a positive random trace, divided by min_{Q̄₃} u so that the
/// minimum there is 1. Member k uses ChaCha8 stream k of `seed`.
pub fn spike_supersolutions(h: f64, ell: &Ellipticity, seed: u64, count: usize) -> Result<Vec<SolvedField>> {
    let radius = 3.0 * 2f64.sqrt();
    let grid = Grid::cube(2, h, (radius / h).ceil() * h + 2.0 * h)?;
    let domain = Region::ball([0.0; 3], radius);
    let q3 = Region::cube([0.0; 3], 3.0).nonempty_nodes(&grid)?;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let g = trace(&mut rng, 0.5);
        let strength = rng.gen_range(20.0..200.0);
        let r0 = rng.gen_range(0.0..0.8);
        let t0 = rng.gen_range(0.0..2.0 * PI);
        let p = [r0 * t0.cos(), r0 * t0.sin(), 0.0];
        let f = ScalarField::from_fn(&grid, |x| {
            let d2 = (x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2);
            -strength * (-d2 / (2.0 * 0.01)).exp()
        })?;
        let bd = BoundaryData::from_fn(&grid, |x| g(x))?;
        let sol = solve_pucci(&domain, PucciSign::Minus, &f, &bd, ell, &nonlinear_cfg())?;
        let min3 = q3.iter().map(|&i| sol.field.at(i)).fold(f64::INFINITY, f64::min);
        let field = sol.field.map(|v| v / min3)?;
        let rhs = f.map(|v| v / min3)?;
        out.push(SolvedField { field, rhs, residual: sol.residual / min3, seed });
    }
    Ok(out)
}

/// 2D solutions of P⁺(D²u) = 0 on B₁ with random traces of amplitude 2.
pub fn pplus_solutions(h: f64, ell: &Ellipticity, seed: u64, count: usize) -> Result<Vec<SolvedField>> {
    let grid = Grid::cube(2, h, 1.0 + 2.0 * h)?;
    let domain = Region::ball([0.0; 3], 1.0);
    let zero = ScalarField::constant(&grid, 0.0)?;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let g = trace(&mut rng, 2.0);
        let bd = BoundaryData::from_fn(&grid, |x| g(x))?;
        let sol = solve_pucci(&domain, PucciSign::Plus, &zero, &bd, ell, &nonlinear_cfg())?;
        out.push(SolvedField { field: sol.field, rhs: zero.clone(), residual: sol.residual, seed });
    }
    Ok(out)
}
