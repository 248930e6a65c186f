//! Closed-form test fields.

use crate::error::{invalid, LabError, Result};
use crate::grid::{dist2, norm, Grid, Point, ScalarField};
use std::collections::BTreeMap;

/// Named numeric parameters with defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FieldParams(pub BTreeMap<String, f64>);

impl FieldParams {
    pub fn new() -> FieldParams {
        FieldParams::default()
    }

    pub fn with(mut self, key: &str, v: f64) -> FieldParams {
        self.0.insert(key.to_string(), v);
        self
    }

    pub fn get(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).copied().unwrap_or(default)
    }

    fn point(&self, prefix: &str) -> Point {
        [0, 1, 2].map(|a| self.get(&format!("{prefix}{a}"), 0.0))
    }
}

/// A sampled family member; `excluded` flags nodes near a singularity.
#[derive(Clone, Debug, PartialEq)]
pub struct LibraryField {
    pub name: String,
    pub field: ScalarField,
    pub excluded: Option<Vec<bool>>,
}

impl LibraryField {
    pub fn excluded_indices(&self) -> Option<Vec<usize>> {
        self.excluded
            .as_ref()
            .map(|m| m.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
    }
}

pub const FAMILIES: &[&str] = &[
    "constant",
    "linear",
    "paraboloid",
    "harmonic_saddle",
    "harmonic_cubic",
    "harmonic_exp",
    "abs_power",
    "log_counterexample",
    "fundamental",
    "pucci_radial",
    "poisson_kernel",
    "huber",
    "sine",
    "gaussian",
];

/// Evaluates a named family on every node.
///
/// Singular families are masked within 4h of the singularity; masked nodes
/// hold 0 (or the continuous extension when there is one).
pub fn field_library(name: &str, grid: &Grid, params: &FieldParams) -> Result<LibraryField> {
    let n = grid.dim();
    let h = grid.h();
    let c = params.point("c");
    let r = |p: &Point| dist2(p, &c).sqrt();
    let mut excluded = None;
    let mask_near = |center: Point, rad: f64| -> Vec<bool> {
        (0..grid.len()).map(|i| dist2(&grid.point(i), &center).sqrt() < rad).collect()
    };
    let field = match name {
        "constant" => ScalarField::constant(grid, params.get("value", 1.0))?,
        "linear" => {
            let a = params.point("a");
            let b = params.get("value", 0.0);
            ScalarField::from_fn(grid, |p| b + a[0] * p[0] + a[1] * p[1] + a[2] * p[2])?
        }
        "paraboloid" => {
            let a = params.get("a", 1.0);
            let b = params.get("value", 0.0);
            ScalarField::from_fn(grid, |p| a * dist2(p, &c) + b)?
        }
        "harmonic_saddle" => {
            if n < 2 {
                return invalid("harmonic_saddle needs dim >= 2");
            }
            ScalarField::from_fn(grid, |p| p[0] * p[0] - p[1] * p[1])?
        }
        "harmonic_cubic" => {
            if n < 2 {
                return invalid("harmonic_cubic needs dim >= 2");
            }
            ScalarField::from_fn(grid, |p| p[0].powi(3) - 3.0 * p[0] * p[1] * p[1])?
        }
        "harmonic_exp" => {
            if n < 2 {
                return invalid("harmonic_exp needs dim >= 2");
            }
            let k = params.get("k", 1.0);
            ScalarField::from_fn(grid, |p| (k * p[0]).exp() * (k * p[1]).cos())?
        }
        "abs_power" => {
            let alpha = params.get("alpha", 0.5);
            if !(alpha > 0.0) {
                return invalid("abs_power needs alpha > 0");
            }
            ScalarField::from_fn(grid, |p| r(p).powf(alpha))?
        }
        "log_counterexample" => {
            let alpha = params.get("alpha", 1.0);
            if !(alpha > 0.0) {
                return invalid("log_counterexample needs alpha > 0");
            }
            // continuous extension by 0 at the center; defined on B_{1/2}
            excluded = Some(
                (0..grid.len())
                    .map(|i| {
                        let d = r(&grid.point(i));
                        d < 4.0 * h || d >= 0.5
                    })
                    .collect::<Vec<bool>>(),
            );
            ScalarField::from_fn(grid, |p| {
                let d = r(p);
                if d == 0.0 || d >= 1.0 {
                    0.0
                } else {
                    d.ln().abs().powf(-alpha)
                }
            })?
        }
        "fundamental" => {
            excluded = Some(mask_near(c, 4.0 * h));
            ScalarField::from_fn(grid, |p| {
                let d = r(p);
                if d < 4.0 * h {
                    0.0
                } else if n == 2 {
                    -d.ln()
                } else if n == 1 {
                    -d
                } else {
                    d.powf(2.0 - n as f64)
                }
            })?
        }
        "pucci_radial" => {
            let lambda = params.get("lambda", 1.0);
            let big = params.get("Lambda", 2.0);
            let alpha = big * (n as f64 - 1.0) / lambda - 1.0;
            if !(alpha > 0.0) {
                return invalid(format!("pucci_radial exponent {alpha} must be positive"));
            }
            excluded = Some(mask_near(c, 4.0 * h));
            ScalarField::from_fn(grid, |p| {
                let d = r(p);
                if d < 4.0 * h {
                    0.0
                } else {
                    d.powf(-alpha)
                }
            })?
        }
        "poisson_kernel" => {
            let z = params.point("z");
            let rz = norm(&z);
            if !(rz > 0.0) {
                return invalid("poisson_kernel needs a pole z != 0");
            }
            excluded = Some(mask_near(z, 4.0 * h));
            ScalarField::from_fn(grid, |p| {
                let d = dist2(p, &z).sqrt();
                if d < 4.0 * h {
                    0.0
                } else {
                    (rz * rz - dist2(p, &[0.0; 3])) / (rz * d.powi(n as i32))
                }
            })?
        }
        "huber" => {
            // inf over y of |y| + |x − y|²/(2ε)
            let eps = params.get("eps", 0.1);
            if !(eps > 0.0) {
                return invalid("huber needs eps > 0");
            }
            ScalarField::from_fn(grid, |p| {
                let d = r(p);
                if d <= eps {
                    d * d / (2.0 * eps)
                } else {
                    d - eps / 2.0
                }
            })?
        }
        "sine" => {
            let k = params.get("k", 1.0);
            ScalarField::from_fn(grid, |p| (k * p[0]).sin())?
        }
        "gaussian" => ScalarField::from_fn(grid, |p| (-dist2(p, &c)).exp())?,
        other => {
            return Err(LabError::InvalidParameter(format!(
                "unknown family '{other}'; known: {}",
                FAMILIES.join(", ")
            )))
        }
    };
    if let Some(m) = &excluded {
        if field.values().iter().zip(m).any(|(v, &ex)| !ex && !v.is_finite()) {
            return Err(LabError::InvalidParameter("singularity inside the unmasked region".into()));
        }
    }
    Ok(LibraryField { name: name.to_string(), field, excluded })
}
