//! Dirichlet problem for the (2n+1)-point Laplacian.

use super::iterate::{color_nodes, default_omega, run, unknowns, BoundaryData, Scheme, Solution, SolverConfig, SolverMode, Sweep};
use crate::error::{invalid, LabError, Result};
use crate::grid::{Grid, Region, ScalarField};
use serde_json::json;

struct Poisson<'a> {
    grid: &'a Grid,
    f: &'a [f64],
}

impl Poisson<'_> {
    fn neighbor_sum(&self, u: &[f64], idx: usize) -> f64 {
        let g = self.grid;
        let ijk = g.multi(idx);
        let mut s = 0.0;
        for a in 0..g.dim() {
            let mut e = [0isize; 3];
            e[a] = 1;
            s += u[g.index(g.shift(ijk, e).unwrap())];
            e[a] = -1;
            s += u[g.index(g.shift(ijk, e).unwrap())];
        }
        s
    }
}

impl Scheme for Poisson<'_> {
    fn residual(&self, u: &[f64], idx: usize) -> f64 {
        let h2 = self.grid.h() * self.grid.h();
        (self.neighbor_sum(u, idx) - 2.0 * self.grid.dim() as f64 * u[idx]) / h2 - self.f[idx]
    }

    fn local_solve(&self, u: &[f64], idx: usize) -> f64 {
        let h2 = self.grid.h() * self.grid.h();
        (self.neighbor_sum(u, idx) - h2 * self.f[idx]) / (2.0 * self.grid.dim() as f64)
    }
}

pub(crate) fn check_inputs(domain_grid: &Grid, f: &ScalarField, g: &BoundaryData) -> Result<()> {
    if f.grid() != domain_grid || g.field().grid() != domain_grid {
        return Err(LabError::GridMismatch("f and g must live on the same grid".into()));
    }
    if g.field().values().iter().any(|v| !v.is_finite()) {
        return invalid("boundary data must be finite");
    }
    Ok(())
}

/// Solves Δ_h u = f on the domain's nodes off the grid edge, u = g elsewhere.
/// The initial guess is g.
pub fn solve_poisson(domain: &Region, f: &ScalarField, g: &BoundaryData, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    let grid = f.grid().clone();
    check_inputs(&grid, f, g)?;
    let nodes = unknowns(&grid, domain)?;
    let n = grid.dim();
    let scheme = Poisson { grid: &grid, f: f.values() };
    let mut u = g.field().values().to_vec();
    let (sweep, mode_param) = match cfg.mode {
        SolverMode::Jacobi => (Sweep::Jacobi, json!(null)),
        SolverMode::GaussSeidelRedBlack => {
            let omega = cfg.omega.unwrap_or_else(|| default_omega(&grid, &nodes));
            let colors = color_nodes(&grid, &nodes, 2, |m| (m[0] + m[1] + m[2]) % 2);
            (Sweep::Colored { colors, omega }, json!({ "omega": omega }))
        }
        SolverMode::PseudoTime => {
            let tau = cfg.tau.unwrap_or(grid.h() * grid.h() / (4.0 * n as f64));
            if tau > grid.h() * grid.h() / (2.0 * n as f64) {
                return invalid("tau above the stability bound h^2/(2n)");
            }
            (Sweep::PseudoTime { tau }, json!({ "tau": tau }))
        }
        SolverMode::NonlinearGaussSeidel => return invalid("nonlinear Gauss-Seidel applies to Pucci problems"),
    };
    let (residual, iterations) = run(&scheme, &mut u, &nodes, &sweep, cfg)?;
    let provenance = json!({
        "solver": "poisson",
        "config": cfg,
        "parameters": mode_param,
        "residual": residual,
        "iterations": iterations,
        "domain": domain.describe(),
    });
    Ok(Solution { field: ScalarField::new(grid, u)?, residual, iterations, provenance })
}
