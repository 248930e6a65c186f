//! Dirichlet problem for the extremal operators P^±(D²_h u) = f.

use super::iterate::{color_nodes, default_omega, run, unknowns, BoundaryData, Scheme, Solution, SolverConfig, SolverMode, Sweep};
use super::poisson::check_inputs;
use crate::error::{invalid, Result};
use crate::grid::{Grid, Region, ScalarField};
use crate::operators::{pucci, Ellipticity, PucciSign, SymMatrix};
use serde_json::json;

struct Pucci<'a> {
    grid: &'a Grid,
    f: &'a [f64],
    ell: Ellipticity,
    sign: PucciSign,
}

impl Pucci<'_> {
    /// Cross-stencil Hessian at `idx` with the center value replaced by `center`.
    fn hessian(&self, u: &[f64], idx: usize, center: f64) -> SymMatrix {
        let g = self.grid;
        let ijk = g.multi(idx);
        let h2 = g.h() * g.h();
        let val = |off: [isize; 3]| u[g.index(g.shift(ijk, off).unwrap())];
        let mut m = SymMatrix::zeros(g.dim());
        for a in 0..g.dim() {
            let mut e = [0isize; 3];
            e[a] = 1;
            let up = val(e);
            e[a] = -1;
            let dn = val(e);
            m.set(a, a, (up + dn - 2.0 * center) / h2);
            for b in a + 1..g.dim() {
                let mut o = [0isize; 3];
                o[a] = 1;
                o[b] = 1;
                let pp = val(o);
                o[b] = -1;
                let pm = val(o);
                o[a] = -1;
                let mm = val(o);
                o[b] = 1;
                let mp = val(o);
                m.set(a, b, (pp - pm - mp + mm) / (4.0 * h2));
            }
        }
        m
    }

    /// Weights on positive and negative eigenvalues.
    fn weights(&self) -> (f64, f64) {
        match self.sign {
            PucciSign::Minus => (self.ell.lambda, self.ell.big_lambda),
            PucciSign::Plus => (self.ell.big_lambda, self.ell.lambda),
        }
    }
}

impl Scheme for Pucci<'_> {
    fn residual(&self, u: &[f64], idx: usize) -> f64 {
        pucci(&self.hessian(u, idx, u[idx]), &self.ell, self.sign) - self.f[idx]
    }

    /// The center value enters D²_h u as −(2u₀/h²) I, so with μ the
    /// eigenvalues at u₀ = 0 the equation is Σ w(μᵢ − s) = f, s = 2u₀/h²,
    /// a decreasing piecewise-linear function of s solved exactly.
    fn local_solve(&self, u: &[f64], idx: usize) -> f64 {
        let n = self.grid.dim();
        let ev = self.hessian(u, idx, 0.0).eigenvalues();
        let mu = &ev[..n];
        let (wp, wn) = self.weights();
        let f = self.f[idx];
        let g = |s: f64| -> f64 {
            mu.iter().map(|&m| if m - s > 0.0 { wp * (m - s) } else { wn * (m - s) }).sum::<f64>() - f
        };
        // g decreases; find the breakpoint interval holding the root
        let mut s_root = None;
        let mut lo = f64::NEG_INFINITY;
        for &b in mu {
            if g(b) <= 0.0 {
                // root in [lo, b]: terms with m > s use wp for m ≥ b
                let (mut a0, mut a1) = (0.0, 0.0);
                for &m in mu {
                    let w = if m >= b { wp } else { wn };
                    a0 += w * m;
                    a1 += w;
                }
                let s = (a0 - f) / a1;
                s_root = Some(s.clamp(lo, b));
                break;
            }
            lo = b;
        }
        let s = s_root.unwrap_or_else(|| {
            let a0: f64 = mu.iter().map(|&m| wn * m).sum();
            ((a0 - f) / (wn * n as f64)).max(lo)
        });
        s * self.grid.h() * self.grid.h() / 2.0
    }
}

/// Solves P^sign(D²_h u) = f on the domain's nodes off the grid edge, u = g
/// elsewhere, starting from g.
///
/// The centered cross stencil is not monotone; convergence is evidenced by
/// the residual only, and the provenance block says so.
pub fn solve_pucci(
    domain: &Region,
    sign: PucciSign,
    f: &ScalarField,
    g: &BoundaryData,
    ell: &Ellipticity,
    cfg: &SolverConfig,
) -> Result<Solution> {
    cfg.validate()?;
    let grid = f.grid().clone();
    check_inputs(&grid, f, g)?;
    let nodes = unknowns(&grid, domain)?;
    let n = grid.dim();
    let scheme = Pucci { grid: &grid, f: f.values(), ell: *ell, sign };
    let mut u = g.field().values().to_vec();
    let h2 = grid.h() * grid.h();
    let (sweep, param) = match cfg.mode {
        SolverMode::PseudoTime => {
            let tau = cfg.tau.unwrap_or(h2 / (4.0 * n as f64 * ell.big_lambda));
            if tau > h2 / (2.0 * n as f64 * ell.big_lambda) {
                return invalid("tau above h^2/(2n Lambda)");
            }
            (Sweep::PseudoTime { tau }, json!({ "tau": tau }))
        }
        SolverMode::NonlinearGaussSeidel | SolverMode::GaussSeidelRedBlack => {
            let omega = cfg.omega.unwrap_or_else(|| default_omega(&grid, &nodes));
            let colors = color_nodes(&grid, &nodes, 8, |m| (m[0] % 2) + 2 * (m[1] % 2) + 4 * (m[2] % 2));
            (Sweep::Colored { colors, omega }, json!({ "omega": omega }))
        }
        SolverMode::Jacobi => (Sweep::Jacobi, json!(null)),
    };
    let (residual, iterations) = run(&scheme, &mut u, &nodes, &sweep, cfg)?;
    let provenance = json!({
        "solver": "pucci",
        "sign": sign,
        "ellipticity": ell,
        "config": cfg,
        "parameters": param,
        "residual": residual,
        "iterations": iterations,
        "domain": domain.describe(),
        "caveat": "centered stencil is not monotone; convergence evidenced by residual only",
    });
    Ok(Solution { field: ScalarField::new(grid, u)?, residual, iterations, provenance })
}
