//! Shared iteration driver for the Dirichlet solvers.

use crate::error::{invalid, LabError, Result};
use crate::grid::{Grid, Region, ScalarField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Dirichlet data: the values of this field are used on every node that is
/// not an unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    field: ScalarField,
}

impl BoundaryData {
    pub fn from_field(field: ScalarField) -> Result<BoundaryData> {
        Ok(BoundaryData { field })
    }

    /// Closed-form trace evaluated at every node.
    pub fn from_fn<F>(grid: &Grid, f: F) -> Result<BoundaryData>
    where
        F: Fn(&crate::grid::Point) -> f64 + Sync,
    {
        Ok(BoundaryData { field: ScalarField::from_fn(grid, f)? })
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<BoundaryData> {
        Ok(BoundaryData { field: ScalarField::constant(grid, c)? })
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    Jacobi,
    GaussSeidelRedBlack,
    PseudoTime,
    /// Colored nonlinear Gauss-Seidel with an exact per-node solve (Pucci only).
    NonlinearGaussSeidel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// max-norm of the equation residual at unknown nodes
    pub tolerance: f64,
    pub max_iterations: usize,
    /// pseudo-time step; defaults to h²/(4nΛ)
    pub tau: Option<f64>,
    /// over-relaxation for the Gauss-Seidel modes; defaults to 2/(1 + sin(πh/L))
    /// with L the side of the unknowns' bounding box
    pub omega: Option<f64>,
    pub mode: SolverMode,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            tolerance: 1e-8,
            max_iterations: 200_000,
            tau: None,
            omega: None,
            mode: SolverMode::GaussSeidelRedBlack,
        }
    }
}

impl SolverConfig {
    pub fn with_mode(mode: SolverMode) -> SolverConfig {
        SolverConfig { mode, ..Default::default() }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return invalid("tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return invalid("max_iterations must be positive");
        }
        if let Some(t) = self.tau {
            if !(t > 0.0) {
                return invalid("tau must be positive");
            }
        }
        if let Some(w) = self.omega {
            if !(w > 0.0 && w < 2.0) {
                return invalid("omega must lie in (0, 2)");
            }
        }
        Ok(())
    }
}

/// A solved field with its convergence record.
#[derive(Clone, Debug)]
pub struct Solution {
    pub field: ScalarField,
    pub residual: f64,
    pub iterations: usize,
    pub provenance: serde_json::Value,
}

/// Unknown nodes: domain members off the grid edge.
pub(crate) fn unknowns(grid: &Grid, domain: &Region) -> Result<Vec<usize>> {
    let nodes: Vec<usize> = domain
        .nodes(grid)
        .into_iter()
        .filter(|&i| !grid.on_edge(grid.multi(i)))
        .collect();
    if nodes.is_empty() {
        return Err(LabError::EmptyRegion);
    }
    Ok(nodes)
}

pub(crate) fn default_omega(grid: &Grid, nodes: &[usize]) -> f64 {
    let mut side = 0usize;
    for a in 0..grid.dim() {
        let lo = nodes.iter().map(|&i| grid.multi(i)[a]).min().unwrap();
        let hi = nodes.iter().map(|&i| grid.multi(i)[a]).max().unwrap();
        side = side.max(hi - lo + 2);
    }
    2.0 / (1.0 + (std::f64::consts::PI / side as f64).sin())
}

/// Splits nodes by color so that nodes of one color never share a stencil.
pub(crate) fn color_nodes(grid: &Grid, nodes: &[usize], colors: usize, color: impl Fn([usize; 3]) -> usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); colors];
    for &i in nodes {
        out[color(grid.multi(i))].push(i);
    }
    out.retain(|c| !c.is_empty());
    out
}

/// Per-node update kinds used by [`run`].
pub(crate) trait Scheme: Sync {
    /// Equation residual at a node.
    fn residual(&self, u: &[f64], idx: usize) -> f64;
    /// Value solving the node's equation with neighbors frozen.
    fn local_solve(&self, u: &[f64], idx: usize) -> f64;
}

pub(crate) enum Sweep {
    Jacobi,
    Colored { colors: Vec<Vec<usize>>, omega: f64 },
    PseudoTime { tau: f64 },
}

/// Residual checks happen every this many sweeps.
const CHECK_EVERY: usize = 10;
/// Divergence: residual 10× larger than this many iterations ago.
const DIVERGENCE_WINDOW: usize = 1000;

pub(crate) fn max_residual<S: Scheme>(scheme: &S, u: &[f64], nodes: &[usize]) -> f64 {
    nodes
        .par_iter()
        .map(|&i| scheme.residual(u, i).abs())
        .reduce(|| 0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

/// Iterates until the max residual drops below the tolerance.
pub(crate) fn run<S: Scheme>(
    scheme: &S,
    u: &mut [f64],
    nodes: &[usize],
    sweep: &Sweep,
    cfg: &SolverConfig,
) -> Result<(f64, usize)> {
    let mut history: Vec<(usize, f64)> = Vec::new();
    let mut it = 0;
    loop {
        if it % CHECK_EVERY == 0 || it == cfg.max_iterations {
            let r = max_residual(scheme, u, nodes);
            if !r.is_finite() {
                return Err(LabError::Divergence { iterations: it, residual: r });
            }
            if r <= cfg.tolerance {
                return Ok((r, it));
            }
            if it >= cfg.max_iterations {
                return Err(LabError::NonConvergence { iterations: it, residual: r });
            }
            if let Some(&(_, old)) = history.iter().rev().find(|(k, _)| it - k >= DIVERGENCE_WINDOW) {
                if r > 10.0 * old {
                    return Err(LabError::Divergence { iterations: it, residual: r });
                }
            }
            history.push((it, r));
            if history.len() > 2 * DIVERGENCE_WINDOW / CHECK_EVERY {
                history.drain(..history.len() - DIVERGENCE_WINDOW / CHECK_EVERY - 1);
            }
        }
        match sweep {
            Sweep::Jacobi => {
                let new: Vec<f64> = nodes.par_iter().map(|&i| scheme.local_solve(u, i)).collect();
                for (&i, v) in nodes.iter().zip(new) {
                    u[i] = v;
                }
            }
            Sweep::Colored { colors, omega } => {
                for c in colors {
                    let new: Vec<f64> = c
                        .par_iter()
                        .map(|&i| u[i] + omega * (scheme.local_solve(u, i) - u[i]))
                        .collect();
                    for (&i, v) in c.iter().zip(new) {
                        u[i] = v;
                    }
                }
            }
            Sweep::PseudoTime { tau } => {
                let new: Vec<f64> = nodes.par_iter().map(|&i| u[i] + tau * scheme.residual(u, i)).collect();
                for (&i, v) in nodes.iter().zip(new) {
                    u[i] = v;
                }
            }
        }
        it += 1;
    }
}
