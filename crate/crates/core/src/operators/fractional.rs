use crate::error::{invalid, LabError, Result};
use crate::grid::{norm, unit_sphere_area, Point, Region, ScalarField};
use crate::operators::diff::laplacian_at;
use crate::quadrature::gauss_legendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Parameters of the lattice fractional Laplacian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalParams {
    /// Order σ ∈ (0, 2).
    pub sigma: f64,
    /// Kernel constant C > 0.
    pub constant: f64,
    /// Radius R of the ball B_R (centered at the origin) on which u is sampled.
    pub radius: f64,
    /// Near-field box half-width in cells: offsets with sup-norm ≤ level use
    /// the second-order Taylor model.
    pub level: usize,
    /// Kernel exponent; `None` means n + σ.
    pub kernel_exponent: Option<f64>,
}

impl FractionalParams {
    pub fn new(sigma: f64, radius: f64) -> FractionalParams {
        FractionalParams { sigma, constant: 1.0, radius, level: 3, kernel_exponent: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 2.0) {
            return invalid(format!("sigma = {} not in (0,2)", self.sigma));
        }
        if !(self.constant > 0.0) {
            return invalid("kernel constant must be positive");
        }
        if !(self.radius > 0.0) {
            return invalid("far-field radius must be positive");
        }
        Ok(())
    }
}

/// What is assumed about u outside B_R.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TailSpec {
    /// u vanishes outside B_R.
    Zero,
    /// |u(z)| ≤ bound·|z|^{−decay} outside B_R; contributes an error bar.
    PowerLaw { bound: f64, decay: f64 },
}

/// Value of the fractional Laplacian at one node with its error bars.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalSample {
    pub node: usize,
    pub point: Point,
    pub value: f64,
    /// |value(level) − value(level − 1)|, or the Taylor term itself at level 0.
    pub quadrature_error: f64,
    pub tail_error: f64,
}

/// ∫_{[−w,w]^n} |y|^{2−s} dy = K·w^{n+2−s}; returns K.
pub fn near_field_moment(n: usize, s: f64) -> f64 {
    let e = n as f64 + 2.0 - s;
    let face = match n {
        1 => 1.0,
        2 => {
            let (x, w) = gauss_legendre(32);
            x.iter().zip(&w).map(|(x, w)| w * (1.0 + x * x).powf(0.5 * (2.0 - s))).sum()
        }
        _ => {
            let (x, w) = gauss_legendre(32);
            let mut acc = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                for (xj, wj) in x.iter().zip(&w) {
                    acc += wi * wj * (1.0 + xi * xi + xj * xj).powf(0.5 * (2.0 - s));
                }
            }
            acc
        }
    };
    2.0 * n as f64 / e * face
}

/// Lattice evaluation at every node of `eval` inside the field's grid.
pub fn fractional_laplacian(
    field: &ScalarField,
    eval: &Region,
    params: &FractionalParams,
    tail: &TailSpec,
) -> Result<Vec<FractionalSample>> {
    let nodes = eval.nonempty_nodes(field.grid())?;
    nodes
        .par_iter()
        .map(|&i| fractional_laplacian_at(field, i, params, tail))
        .collect()
}

fn evaluate_level(field: &ScalarField, node: usize, params: &FractionalParams, s: f64, level: usize) -> f64 {
    let g = field.grid();
    let n = g.dim();
    let h = g.h();
    let x = g.point(node);
    let ijk = g.multi(node);
    let r_far = params.radius - norm(&x);
    let m = (r_far / h).floor() as isize;
    let r2 = (r_far / h) * (r_far / h);
    let u0 = field.at(node);
    let level = level as isize;
    let range = |a: usize| if a < n { -m..=m } else { 0..=0 };
    let mut far = 0.0;
    for i in range(0) {
        for j in range(1) {
            for k in range(2) {
                let kk = (i * i + j * j + k * k) as f64;
                if kk > r2 || i.abs().max(j.abs()).max(k.abs()) <= level {
                    continue;
                }
                let up = field.at_multi(g.shift(ijk, [i, j, k]).unwrap());
                let dn = field.at_multi(g.shift(ijk, [-i, -j, -k]).unwrap());
                far += (up + dn - 2.0 * u0) / (kk.sqrt() * h).powf(s);
            }
        }
    }
    far *= h.powi(n as i32);
    let w = (level as f64 + 0.5) * h;
    let lap = laplacian_at(field, node).unwrap_or(0.0);
    let near = lap / n as f64 * near_field_moment(n, s) * w.powf(n as f64 + 2.0 - s);
    let order = s - n as f64;
    let outside = -2.0 * u0 * unit_sphere_area(n) * r_far.powf(-order) / order;
    params.constant * (far + near + outside)
}

/// Lattice evaluation at a single node.
pub fn fractional_laplacian_at(
    field: &ScalarField,
    node: usize,
    params: &FractionalParams,
    tail: &TailSpec,
) -> Result<FractionalSample> {
    params.validate()?;
    let g = field.grid();
    let n = g.dim();
    let s = params.kernel_exponent.unwrap_or(n as f64 + params.sigma);
    if !(s > n as f64 && s < n as f64 + 2.0) {
        return invalid(format!("kernel exponent {s} must lie in (n, n+2)"));
    }
    if !g.covers_box(&[0.0; 3], params.radius) {
        return Err(LabError::OutsideGrid(format!(
            "grid does not cover the ball of radius {}",
            params.radius
        )));
    }
    let x = g.point(node);
    let r_far = params.radius - norm(&x);
    let near_width = (params.level as f64 + 0.5) * g.h() * (n as f64).sqrt();
    if r_far <= near_width + g.h() {
        return Err(LabError::OutsideGrid(
            "eval point too close to grid boundary for requested R".into(),
        ));
    }
    if g.shift(g.multi(node), [1, 0, 0]).is_none() {
        return Err(LabError::OutsideGrid("eval point on the grid edge".into()));
    }
    let value = evaluate_level(field, node, params, s, params.level);
    let quadrature_error = if params.level == 0 {
        let w = 0.5 * g.h();
        let lap = laplacian_at(field, node).unwrap_or(0.0);
        (params.constant * lap / n as f64 * near_field_moment(n, s) * w.powf(n as f64 + 2.0 - s)).abs()
    } else {
        (value - evaluate_level(field, node, params, s, params.level - 1)).abs()
    };
    let tail_error = match tail {
        TailSpec::Zero => 0.0,
        TailSpec::PowerLaw { bound, decay } => {
            let gap = params.radius - 2.0 * norm(&x);
            if gap <= 0.0 {
                f64::INFINITY
            } else {
                let order = s - n as f64;
                params.constant * 2.0 * bound * gap.powf(-decay) * unit_sphere_area(n)
                    * r_far.powf(-order)
                    / order
            }
        }
    };
    Ok(FractionalSample { node, point: x, value, quadrature_error, tail_error })
}
