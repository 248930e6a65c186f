use super::{Grid, ScalarField};
use crate::error::{invalid, LabError, Result};
use rayon::prelude::*;

/// A rescaled field with its interpolation tolerance.
#[derive(Clone, Debug)]
pub struct Rescaled {
    pub field: ScalarField,
    /// r^{−α} times the largest corner-value range over the source cells
    /// that were interpolated; an O(h) bound for Lipschitz data.
    pub tolerance: f64,
}

/// u_r(x) = r^{−α} u(r x) on the cube [−1, 1]^dim with the source spacing.
pub fn rescale(field: &ScalarField, alpha: f64, r: f64) -> Result<Rescaled> {
    let g = field.grid();
    let target = Grid::cube(g.dim(), g.h(), 1.0)?;
    rescale_onto(field, alpha, r, &target)
}

/// u_r(x) = r^{−α} u(r x) sampled at the nodes of `target`.
pub fn rescale_onto(field: &ScalarField, alpha: f64, r: f64, target: &Grid) -> Result<Rescaled> {
    if !(r > 0.0 && r <= 1.0) {
        return invalid(format!("scale r = {r} not in (0,1]"));
    }
    if target.dim() != field.grid().dim() {
        return Err(LabError::GridMismatch("dimension mismatch".into()));
    }
    let scale = r.powf(-alpha);
    let samples: Vec<Option<(f64, f64)>> = (0..target.len())
        .into_par_iter()
        .map(|i| {
            let mut p = target.point(i);
            for c in p.iter_mut() {
                *c *= r;
            }
            let v = field.interpolate(&p)?;
            let range = field.cell_range(&p)?;
            Some((scale * v, scale * range))
        })
        .collect();
    let mut values = Vec::with_capacity(samples.len());
    let mut tolerance = 0.0f64;
    for s in samples {
        match s {
            Some((v, t)) => {
                values.push(v);
                tolerance = tolerance.max(t);
            }
            None => {
                return Err(LabError::OutsideGrid(
                    "dilated sample point leaves the source grid".into(),
                ))
            }
        }
    }
    Ok(Rescaled { field: ScalarField::new(target.clone(), values)?, tolerance })
}
