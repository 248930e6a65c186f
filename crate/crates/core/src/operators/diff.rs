use super::pucci::{pucci, pucci_minus, pucci_plus, Ellipticity, PucciSign};
use super::SymMatrix;
use crate::error::{invalid, LabError, Result};
use crate::grid::{Grid, ScalarField};
use crate::report::CheckReport;
use rayon::prelude::*;

/// Per-node vectors (entries past the grid dimension are zero).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub values: Vec<[f64; 3]>,
}

/// Per-node symmetric matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField {
    pub grid: Grid,
    pub values: Vec<SymMatrix>,
}

impl VectorField {
    pub fn new(grid: Grid, values: Vec<[f64; 3]>) -> Result<VectorField> {
        if values.len() != grid.len() {
            return Err(LabError::GridMismatch("vector count differs from node count".into()));
        }
        Ok(VectorField { grid, values })
    }
}

impl MatrixField {
    pub fn new(grid: Grid, values: Vec<SymMatrix>) -> Result<MatrixField> {
        if values.len() != grid.len() {
            return Err(LabError::GridMismatch("matrix count differs from node count".into()));
        }
        if values.iter().any(|m| m.dim() != grid.dim()) {
            return Err(LabError::GridMismatch("matrix size differs from grid dimension".into()));
        }
        Ok(MatrixField { grid, values })
    }

    pub fn constant(grid: &Grid, m: SymMatrix) -> Result<MatrixField> {
        MatrixField::new(grid.clone(), vec![m; grid.len()])
    }
}

/// Coefficients of L v = A:D²v + b·Dv + c v, with right-hand side f.
#[derive(Clone, Debug)]
pub struct LinearCoefficients {
    pub a: MatrixField,
    pub b: VectorField,
    pub c: ScalarField,
    pub f: ScalarField,
}

impl LinearCoefficients {
    /// Verifies λI ≤ A(x) ≤ ΛI at every node.
    pub fn check_ellipticity(&self, ell: &Ellipticity, tol: f64) -> Result<()> {
        match self.a.values.iter().position(|m| !ell.admits(m, tol)) {
            None => Ok(()),
            Some(i) => Err(LabError::Hypothesis(format!(
                "coefficient matrix at node {i} violates the ellipticity bounds"
            ))),
        }
    }
}

fn interior_grid(field: &ScalarField) -> Result<Grid> {
    field
        .grid()
        .interior(1)
        .map_err(|e| LabError::GridTooSmall(format!("differences need a one-node margin: {e}")))
}

/// Centered gradient on the interior nodes (one-node margin).
pub fn gradient(field: &ScalarField) -> Result<VectorField> {
    let out = interior_grid(field)?;
    let g = field.grid();
    let values = (0..out.len())
        .into_par_iter()
        .map(|i| gradient_at(field, g.locate(&out.point(i)).unwrap()).unwrap())
        .collect();
    VectorField::new(out, values)
}

/// Centered gradient at one node; `None` on the grid edge.
pub fn gradient_at(field: &ScalarField, idx: usize) -> Option<[f64; 3]> {
    let g = field.grid();
    let ijk = g.multi(idx);
    let mut d = [0.0; 3];
    for (a, slot) in d.iter_mut().enumerate().take(g.dim()) {
        let mut off = [0isize; 3];
        off[a] = 1;
        let p = g.shift(ijk, off)?;
        off[a] = -1;
        let m = g.shift(ijk, off)?;
        *slot = (field.at_multi(p) - field.at_multi(m)) / (2.0 * g.h());
    }
    Some(d)
}

/// Centered Hessian at one node (4-point cross stencil); `None` on the edge.
pub fn hessian_at(field: &ScalarField, idx: usize) -> Option<SymMatrix> {
    let g = field.grid();
    let ijk = g.multi(idx);
    let h2 = g.h() * g.h();
    let u0 = field.at(idx);
    let val = |off: [isize; 3]| g.shift(ijk, off).map(|n| field.at_multi(n));
    let mut m = SymMatrix::zeros(g.dim());
    for a in 0..g.dim() {
        let mut e = [0isize; 3];
        e[a] = 1;
        let up = val(e)?;
        e[a] = -1;
        let dn = val(e)?;
        m.set(a, a, (up + dn - 2.0 * u0) / h2);
        for b in a + 1..g.dim() {
            let mut o = [0isize; 3];
            o[a] = 1;
            o[b] = 1;
            let pp = val(o)?;
            o[b] = -1;
            let pm = val(o)?;
            o[a] = -1;
            let mm = val(o)?;
            o[b] = 1;
            let mp = val(o)?;
            m.set(a, b, (pp - pm - mp + mm) / (4.0 * h2));
        }
    }
    Some(m)
}

/// Discrete Laplacian at one node (2n+1-point stencil); `None` on the edge.
pub fn laplacian_at(field: &ScalarField, idx: usize) -> Option<f64> {
    let g = field.grid();
    let ijk = g.multi(idx);
    let u0 = field.at(idx);
    let mut s = 0.0;
    for a in 0..g.dim() {
        let mut e = [0isize; 3];
        e[a] = 1;
        s += field.at_multi(g.shift(ijk, e)?);
        e[a] = -1;
        s += field.at_multi(g.shift(ijk, e)?);
        s -= 2.0 * u0;
    }
    Some(s / (g.h() * g.h()))
}

/// Centered Hessian on the interior nodes.
pub fn hessian(field: &ScalarField) -> Result<MatrixField> {
    let out = interior_grid(field)?;
    let g = field.grid();
    let values = (0..out.len())
        .into_par_iter()
        .map(|i| hessian_at(field, g.locate(&out.point(i)).unwrap()).unwrap())
        .collect();
    MatrixField::new(out, values)
}

/// Discrete Laplacian on the interior nodes.
pub fn laplacian(field: &ScalarField) -> Result<ScalarField> {
    let out = interior_grid(field)?;
    let g = field.grid();
    let values = (0..out.len())
        .into_par_iter()
        .map(|i| laplacian_at(field, g.locate(&out.point(i)).unwrap()).unwrap())
        .collect();
    ScalarField::new(out, values)
}

/// P^±(D²u) on the interior nodes.
pub fn pucci_field(field: &ScalarField, ell: &Ellipticity, sign: PucciSign) -> Result<ScalarField> {
    let hess = hessian(field)?;
    let values = hess.values.par_iter().map(|m| pucci(m, ell, sign)).collect();
    ScalarField::new(hess.grid, values)
}

/// A(x):D²u + b(x)·Du + c(x)u on the interior nodes.
pub fn linear_apply(field: &ScalarField, coeffs: &LinearCoefficients) -> Result<ScalarField> {
    let g = field.grid();
    if coeffs.a.grid != *g || coeffs.b.grid != *g || coeffs.c.grid() != g {
        return Err(LabError::GridMismatch("coefficients must share the field's grid".into()));
    }
    let out = interior_grid(field)?;
    let values = (0..out.len())
        .into_par_iter()
        .map(|i| {
            let idx = g.locate(&out.point(i)).unwrap();
            let hess = hessian_at(field, idx).unwrap();
            let grad = gradient_at(field, idx).unwrap();
            let b = coeffs.b.values[idx];
            coeffs.a.values[idx].contract(&hess)
                + (0..g.dim()).map(|k| b[k] * grad[k]).sum::<f64>()
                + coeffs.c.at(idx) * field.at(idx)
        })
        .collect();
    ScalarField::new(out, values)
}

/// Max violation of P⁻(D²u) ≤ f and P⁺(D²u) ≥ −f over interior nodes.
///
/// `f` may live on any grid aligned with the field that contains the interior nodes.
pub fn pucci_sandwich_residual(
    field: &ScalarField,
    f: &ScalarField,
    ell: &Ellipticity,
    tolerance: f64,
) -> Result<CheckReport> {
    if f.values().iter().any(|&v| v < 0.0) {
        return invalid("forcing must be non-negative");
    }
    let hess = hessian(field)?;
    let mut lower = 0.0f64;
    let mut upper = 0.0f64;
    for (i, m) in hess.values.iter().enumerate() {
        let p = hess.grid.point(i);
        let fv = f.at_point(&p).ok_or_else(|| {
            LabError::GridMismatch("forcing does not cover the interior nodes".into())
        })?;
        lower = lower.max(pucci_minus(m, ell) - fv);
        upper = upper.max(-fv - pucci_plus(m, ell));
    }
    let violation = lower.max(upper);
    let mut report = CheckReport::new("pucci_sandwich_residual", violation, 0.0, tolerance, field.grid());
    report.note(format!("max(P- - f) = {lower:e}, max(-f - P+) = {upper:e}"));
    Ok(report)
}

/// v(x) = (u(x + s e) + u(x − s e) − 2u(x)) / s² for a lattice step s e.
pub fn second_difference(field: &ScalarField, e: &[f64], h_step: f64) -> Result<ScalarField> {
    let g = field.grid();
    if e.len() != g.dim() {
        return invalid("direction must have one entry per axis");
    }
    let len = e.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (len - 1.0).abs() > 1e-9 {
        return invalid("direction must be a unit vector");
    }
    let mut off = [0isize; 3];
    for a in 0..g.dim() {
        let t = h_step * e[a] / g.h();
        if (t - t.round()).abs() > 1e-6 {
            return invalid("step times direction must be a lattice vector");
        }
        off[a] = t.round() as isize;
    }
    if off.iter().all(|&o| o == 0) {
        return invalid("step must be non-zero");
    }
    let mut margins = [0usize; 3];
    for a in 0..g.dim() {
        margins[a] = off[a].unsigned_abs();
    }
    let out = g
        .shrink(margins)
        .map_err(|_| LabError::GridTooSmall("step too large for grid".into()))?;
    let neg = [-off[0], -off[1], -off[2]];
    let s2 = h_step * h_step;
    let values = (0..out.len())
        .into_par_iter()
        .map(|i| {
            let ijk = g.multi(g.locate(&out.point(i)).unwrap());
            let up = field.at_multi(g.shift(ijk, off).unwrap());
            let dn = field.at_multi(g.shift(ijk, neg).unwrap());
            (up + dn - 2.0 * field.at_multi(ijk)) / s2
        })
        .collect();
    ScalarField::new(out, values)
}
