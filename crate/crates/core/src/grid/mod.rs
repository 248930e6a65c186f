//! Uniform lattices, scalar fields on them, node regions and the
//! norm / seminorm / oscillation machinery.

mod maximal;
mod norms;
mod region;
mod rescale;

pub use maximal::hardy_littlewood_maximal;
pub use norms::{
    holder_seminorm, lp_norm, lp_norm_report, oscillation, weighted_seminorm, HolderModulus,
    NormReport,
};
pub use region::{squared_distance_to, Region};
pub use rescale::{rescale, rescale_onto, Rescaled};

use crate::error::{invalid, LabError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A point in space. Coordinates past the grid dimension are zero.
pub type Point = [f64; 3];

/// Pads a slice of up to three coordinates into a [`Point`].
pub fn pt(coords: &[f64]) -> Point {
    let mut p = [0.0; 3];
    for (slot, c) in p.iter_mut().zip(coords) {
        *slot = *c;
    }
    p
}

pub fn dist2(a: &Point, b: &Point) -> f64 {
    (0..3).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum()
}

pub fn norm(p: &Point) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Volume of the unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => {
            let n = n as f64;
            std::f64::consts::PI.powf(n / 2.0) / gamma_half_integer(n / 2.0 + 1.0)
        }
    }
}

/// Surface area of the unit sphere in dimension `n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

fn gamma_half_integer(x: f64) -> f64 {
    // x is a positive integer or half-integer.
    let mut acc = if (x.fract() - 0.5).abs() < 1e-12 {
        std::f64::consts::PI.sqrt()
    } else {
        1.0
    };
    let mut y = if (x.fract() - 0.5).abs() < 1e-12 { 0.5 } else { 1.0 };
    while y < x - 1e-12 {
        acc *= y;
        y += 1.0;
    }
    acc
}

/// Uniform Cartesian lattice in dimension 1, 2 or 3.
///
/// Nodes are stored row-major: the last used axis varies fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    h: f64,
    origin: Point,
    counts: [usize; 3],
}

/// Plain description of a grid, used in serialized headers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub dim: usize,
    pub h: f64,
    pub origin: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Grid {
    /// Validated constructor; every axis needs at least three nodes.
    pub fn new(dim: usize, h: f64, origin: &[f64], counts: &[usize]) -> Result<Grid> {
        if !(1..=3).contains(&dim) {
            return invalid(format!("dimension {dim} not in 1..=3"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return invalid(format!("spacing {h} must be positive"));
        }
        if origin.len() != dim || counts.len() != dim {
            return invalid("origin and counts must have one entry per axis");
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return invalid("origin must be finite");
        }
        if let Some(c) = counts.iter().find(|&&c| c < 3) {
            return Err(LabError::GridTooSmall(format!(
                "{c} nodes on an axis, need at least 3"
            )));
        }
        let mut c = [1usize; 3];
        c[..dim].copy_from_slice(counts);
        Ok(Grid {
            dim,
            h,
            origin: pt(origin),
            counts: c,
        })
    }

    /// Grid on the cube [-L, L]^dim with nodes on the lattice hZ^dim.
    ///
    /// L is rounded up to the next multiple of h.
    pub fn cube(dim: usize, h: f64, half_width: f64) -> Result<Grid> {
        if !(half_width > 0.0) {
            return invalid("half width must be positive");
        }
        let n = (half_width / h - 1e-9).ceil().max(1.0) as usize;
        let origin = vec![-(n as f64) * h; dim];
        Grid::new(dim, h, &origin, &vec![2 * n + 1; dim])
    }

    /// Grid on [0, 1] with `intervals` cells.
    pub fn unit_interval(intervals: usize) -> Result<Grid> {
        Grid::new(1, 1.0 / intervals as f64, &[0.0], &[intervals + 1])
    }

    pub fn from_info(info: &GridInfo) -> Result<Grid> {
        Grid::new(info.dim, info.h, &info.origin, &info.counts)
    }

    pub fn info(&self) -> GridInfo {
        GridInfo {
            dim: self.dim,
            h: self.h,
            origin: self.origin[..self.dim].to_vec(),
            counts: self.counts[..self.dim].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts[..self.dim]
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// h^dim, the weight of one node in Riemann sums.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        (ijk[0] * self.counts[1] + ijk[1]) * self.counts[2] + ijk[2]
    }

    pub fn multi(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.counts[2];
        let rest = idx / self.counts[2];
        [rest / self.counts[1], rest % self.counts[1], k]
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.h
    }

    pub fn point_of(&self, ijk: [usize; 3]) -> Point {
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.coord(a, ijk[a]);
        }
        p
    }

    pub fn point(&self, idx: usize) -> Point {
        self.point_of(self.multi(idx))
    }

    /// Multi-index shifted by an integer offset, if it stays on the grid.
    pub fn shift(&self, ijk: [usize; 3], off: [isize; 3]) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let v = ijk[a] as isize + off[a];
            if v < 0 || v >= self.counts[a] as isize {
                return None;
            }
            out[a] = v as usize;
        }
        Some(out)
    }

    /// Index of the node at `p`, if `p` is a node (up to 1e-6·h per axis).
    pub fn locate(&self, p: &Point) -> Option<usize> {
        let mut ijk = [0usize; 3];
        for a in 0..self.dim {
            let t = (p[a] - self.origin[a]) / self.h;
            let r = t.round();
            if (t - r).abs() > 1e-6 || r < 0.0 || r >= self.counts[a] as f64 {
                return None;
            }
            ijk[a] = r as usize;
        }
        for a in self.dim..3 {
            if p[a].abs() > 1e-12 {
                return None;
            }
        }
        Some(self.index(ijk))
    }

    /// Nearest node to `p` (clamped into the grid box).
    pub fn nearest(&self, p: &Point) -> usize {
        let mut ijk = [0usize; 3];
        for a in 0..self.dim {
            let t = ((p[a] - self.origin[a]) / self.h).round();
            ijk[a] = t.clamp(0.0, (self.counts[a] - 1) as f64) as usize;
        }
        self.index(ijk)
    }

    /// Lower and upper corners of the grid box.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for a in 0..self.dim {
            lo[a] = self.origin[a];
            hi[a] = self.coord(a, self.counts[a] - 1);
        }
        (lo, hi)
    }

    /// True when the closed box around `p` of half-width `r` lies in the grid box.
    pub fn covers_box(&self, center: &Point, r: f64) -> bool {
        let (lo, hi) = self.bounds();
        let slack = 1e-9 * self.h;
        (0..self.dim).all(|a| center[a] - r >= lo[a] - slack && center[a] + r <= hi[a] + slack)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounds();
        dist2(&lo, &hi).sqrt()
    }

    /// Distance from `p` to the boundary of the grid box.
    pub fn box_distance(&self, p: &Point) -> f64 {
        let (lo, hi) = self.bounds();
        (0..self.dim)
            .map(|a| (p[a] - lo[a]).min(hi[a] - p[a]))
            .fold(f64::INFINITY, f64::min)
    }

    /// True when the node touches the outer faces of the grid.
    pub fn on_edge(&self, ijk: [usize; 3]) -> bool {
        (0..self.dim).any(|a| ijk[a] == 0 || ijk[a] + 1 == self.counts[a])
    }

    /// Sub-grid obtained by dropping `margins[a]` nodes at both ends of axis `a`.
    ///
    /// Derived grids may have fewer than three nodes per axis.
    pub fn shrink(&self, margins: [usize; 3]) -> Result<Grid> {
        let mut counts = [1usize; 3];
        let mut origin = [0.0; 3];
        for a in 0..self.dim {
            if self.counts[a] <= 2 * margins[a] {
                return Err(LabError::GridTooSmall(format!(
                    "axis {a} has {} nodes, margin {} leaves none",
                    self.counts[a], margins[a]
                )));
            }
            counts[a] = self.counts[a] - 2 * margins[a];
            origin[a] = self.coord(a, margins[a]);
        }
        Ok(Grid {
            dim: self.dim,
            h: self.h,
            origin,
            counts,
        })
    }

    pub fn interior(&self, margin: usize) -> Result<Grid> {
        let mut m = [0usize; 3];
        m[..self.dim].fill(margin);
        self.shrink(m)
    }

    /// True when both grids share spacing and lattice alignment.
    pub fn aligned_with(&self, other: &Grid) -> bool {
        if self.dim != other.dim || (self.h - other.h).abs() > 1e-12 * self.h {
            return false;
        }
        (0..self.dim).all(|a| {
            let t = (self.origin[a] - other.origin[a]) / self.h;
            (t - t.round()).abs() < 1e-6
        })
    }

    /// Integer lattice offsets (first `dim` entries used) of all nodes in
    /// the open ball of radius `r` around a node.
    pub fn ball_offsets(&self, r: f64) -> Vec<[isize; 3]> {
        let m = (r / self.h).ceil() as isize;
        let r2 = (r / self.h) * (r / self.h);
        let range = |a: usize| if a < self.dim { -m..=m } else { 0..=0 };
        let mut out = Vec::new();
        for i in range(0) {
            for j in range(1) {
                for k in range(2) {
                    if ((i * i + j * j + k * k) as f64) < r2 {
                        out.push([i, j, k]);
                    }
                }
            }
        }
        out
    }
}

/// Real values on every node of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite value at node {i}"));
        }
        Ok(ScalarField { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn<F>(grid: &Grid, f: F) -> Result<ScalarField>
    where
        F: Fn(&Point) -> f64 + Sync,
    {
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.point(i)))
            .collect();
        ScalarField::new(grid.clone(), values)
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<ScalarField> {
        ScalarField::new(grid.clone(), vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn at_multi(&self, ijk: [usize; 3]) -> f64 {
        self.values[self.grid.index(ijk)]
    }

    /// Value at a node given by position, if `p` is a node of this grid.
    pub fn at_point(&self, p: &Point) -> Option<f64> {
        self.grid.locate(p).map(|i| self.values[i])
    }

    /// Multilinear interpolation; `None` outside the grid box.
    pub fn interpolate(&self, p: &Point) -> Option<f64> {
        let g = &self.grid;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..g.dim {
            let t = (p[a] - g.origin[a]) / g.h;
            let last = (g.counts[a] - 1) as f64;
            if t < -1e-9 || t > last + 1e-9 {
                return None;
            }
            let t = t.clamp(0.0, last);
            let i = (t.floor() as usize).min(g.counts[a].saturating_sub(2));
            base[a] = i;
            frac[a] = t - i as f64;
            if g.counts[a] == 1 {
                frac[a] = 0.0;
            }
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << g.dim) {
            let mut w = 1.0;
            let mut ijk = base;
            for a in 0..g.dim {
                if corner >> a & 1 == 1 {
                    w *= frac[a];
                    ijk[a] += 1;
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w != 0.0 {
                acc += w * self.at_multi(ijk);
            }
        }
        Some(acc)
    }

    /// Range of the values at the corners of the cell containing `p`.
    pub(crate) fn cell_range(&self, p: &Point) -> Option<f64> {
        let g = &self.grid;
        let mut base = [0usize; 3];
        for a in 0..g.dim {
            let t = (p[a] - g.origin[a]) / g.h;
            let last = (g.counts[a] - 1) as f64;
            if t < -1e-9 || t > last + 1e-9 {
                return None;
            }
            base[a] = (t.clamp(0.0, last).floor() as usize).min(g.counts[a].saturating_sub(2));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for corner in 0..(1usize << g.dim) {
            let mut ijk = base;
            for a in 0..g.dim {
                if corner >> a & 1 == 1 && g.counts[a] > 1 {
                    ijk[a] += 1;
                }
            }
            let v = self.at_multi(ijk);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Some(hi - lo)
    }

    pub fn map<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> Result<ScalarField> {
        ScalarField::new(self.grid.clone(), self.values.par_iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination with a field on the same grid.
    pub fn zip_map<F: Fn(f64, f64) -> f64 + Sync>(
        &self,
        other: &ScalarField,
        f: F,
    ) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(LabError::GridMismatch("fields live on different grids".into()));
        }
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        ScalarField::new(self.grid.clone(), values)
    }

    /// Copies the values at the nodes of `target`, which must be a sub-lattice of this grid.
    pub fn restrict(&self, target: &Grid) -> Result<ScalarField> {
        if !self.grid.aligned_with(target) {
            return Err(LabError::GridMismatch("target grid not aligned".into()));
        }
        let mut values = Vec::with_capacity(target.len());
        for i in 0..target.len() {
            match self.at_point(&target.point(i)) {
                Some(v) => values.push(v),
                None => {
                    return Err(LabError::OutsideGrid(
                        "target grid leaves the source grid".into(),
                    ))
                }
            }
        }
        ScalarField::new(target.clone(), values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}
