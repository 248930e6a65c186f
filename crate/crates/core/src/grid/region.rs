use super::{dist2, Grid, Point, ScalarField};
use crate::error::{LabError, Result};
use rayon::prelude::*;
use std::sync::Arc;

/// A set of grid nodes described by a predicate on node positions.
///
/// Balls and annuli are open (strict inequalities); cubes and half-spaces
/// are closed. Level-set regions look values up at the node positions, so a
/// point that is not a node of the defining field is never a member.
#[derive(Clone, Debug)]
pub enum Region {
    All,
    Ball { center: Point, radius: f64 },
    ClosedBall { center: Point, radius: f64 },
    Cube { center: Point, side: f64 },
    Annulus { center: Point, r_in: f64, r_out: f64 },
    /// normal·x ≤ offset (or < offset when strict)
    HalfSpace { normal: Point, offset: f64, strict: bool },
    /// u ≤ level (or u < level when strict)
    Sublevel { field: Arc<ScalarField>, level: f64, strict: bool },
    /// u ≥ level (or u > level when strict)
    Superlevel { field: Arc<ScalarField>, level: f64, strict: bool },
    /// Explicit membership flags on a grid.
    Mask { grid: Grid, flags: Arc<Vec<bool>> },
    Intersection(Box<Region>, Box<Region>),
    Union(Box<Region>, Box<Region>),
    Difference(Box<Region>, Box<Region>),
}

impl Region {
    pub fn ball(center: Point, radius: f64) -> Region {
        Region::Ball { center, radius }
    }

    pub fn closed_ball(center: Point, radius: f64) -> Region {
        Region::ClosedBall { center, radius }
    }

    pub fn cube(center: Point, side: f64) -> Region {
        Region::Cube { center, side }
    }

    pub fn annulus(center: Point, r_in: f64, r_out: f64) -> Region {
        Region::Annulus { center, r_in, r_out }
    }

    pub fn half_space(normal: Point, offset: f64) -> Region {
        Region::HalfSpace { normal, offset, strict: false }
    }

    pub fn open_half_space(normal: Point, offset: f64) -> Region {
        Region::HalfSpace { normal, offset, strict: true }
    }

    pub fn sublevel(field: Arc<ScalarField>, level: f64) -> Region {
        Region::Sublevel { field, level, strict: false }
    }

    pub fn superlevel(field: Arc<ScalarField>, level: f64, strict: bool) -> Region {
        Region::Superlevel { field, level, strict }
    }

    pub fn from_mask(grid: &Grid, flags: Vec<bool>) -> Region {
        Region::Mask { grid: grid.clone(), flags: Arc::new(flags) }
    }

    pub fn from_nodes(grid: &Grid, nodes: &[usize]) -> Region {
        let mut flags = vec![false; grid.len()];
        for &i in nodes {
            flags[i] = true;
        }
        Region::from_mask(grid, flags)
    }

    pub fn intersect(self, other: Region) -> Region {
        Region::Intersection(Box::new(self), Box::new(other))
    }

    pub fn union(self, other: Region) -> Region {
        Region::Union(Box::new(self), Box::new(other))
    }

    pub fn minus(self, other: Region) -> Region {
        Region::Difference(Box::new(self), Box::new(other))
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::All => true,
            Region::Ball { center, radius } => dist2(p, center) < radius * radius,
            Region::ClosedBall { center, radius } => dist2(p, center) <= radius * radius,
            Region::Cube { center, side } => {
                (0..3).all(|a| (p[a] - center[a]).abs() <= 0.5 * side)
            }
            Region::Annulus { center, r_in, r_out } => {
                let d = dist2(p, center);
                d > r_in * r_in && d < r_out * r_out
            }
            Region::HalfSpace { normal, offset, strict } => {
                let v = normal[0] * p[0] + normal[1] * p[1] + normal[2] * p[2];
                if *strict {
                    v < *offset
                } else {
                    v <= *offset
                }
            }
            Region::Sublevel { field, level, strict } => match field.at_point(p) {
                Some(v) if *strict => v < *level,
                Some(v) => v <= *level,
                None => false,
            },
            Region::Superlevel { field, level, strict } => match field.at_point(p) {
                Some(v) if *strict => v > *level,
                Some(v) => v >= *level,
                None => false,
            },
            Region::Mask { grid, flags } => grid.locate(p).map(|i| flags[i]).unwrap_or(false),
            Region::Intersection(a, b) => a.contains(p) && b.contains(p),
            Region::Union(a, b) => a.contains(p) || b.contains(p),
            Region::Difference(a, b) => a.contains(p) && !b.contains(p),
        }
    }

    /// Membership flag for every node of `grid`.
    pub fn mask(&self, grid: &Grid) -> Vec<bool> {
        (0..grid.len())
            .into_par_iter()
            .map(|i| self.contains(&grid.point(i)))
            .collect()
    }

    /// Indices of member nodes, ascending.
    pub fn nodes(&self, grid: &Grid) -> Vec<usize> {
        (0..grid.len())
            .into_par_iter()
            .filter(|&i| self.contains(&grid.point(i)))
            .collect()
    }

    /// Indices of member nodes; errors when there are none.
    pub fn nonempty_nodes(&self, grid: &Grid) -> Result<Vec<usize>> {
        let nodes = self.nodes(grid);
        if nodes.is_empty() {
            Err(LabError::EmptyRegion)
        } else {
            Ok(nodes)
        }
    }

    pub fn count(&self, grid: &Grid) -> usize {
        (0..grid.len())
            .into_par_iter()
            .filter(|&i| self.contains(&grid.point(i)))
            .count()
    }

    /// Node count times h^dim.
    pub fn measure(&self, grid: &Grid) -> f64 {
        self.count(grid) as f64 * grid.cell_volume()
    }

    /// Distance from `p` to the boundary, for the closed-form shapes.
    pub fn boundary_distance(&self, p: &Point) -> Option<f64> {
        match self {
            Region::Ball { center, radius } | Region::ClosedBall { center, radius } => {
                Some((radius - dist2(p, center).sqrt()).abs())
            }
            Region::Cube { center, side } => {
                let mut best = f64::INFINITY;
                let mut inside = true;
                let mut out2 = 0.0;
                for a in 0..3 {
                    if side.is_finite() {
                        let d = 0.5 * side - (p[a] - center[a]).abs();
                        if d < 0.0 {
                            inside = false;
                            out2 += d * d;
                        }
                        best = best.min(d.abs());
                    }
                }
                Some(if inside { best } else { out2.sqrt() })
            }
            Region::Annulus { center, r_in, r_out } => {
                let d = dist2(p, center).sqrt();
                Some((d - r_in).abs().min((r_out - d).abs()))
            }
            Region::HalfSpace { normal, offset, .. } => {
                let n = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2])
                    .sqrt();
                Some(((normal[0] * p[0] + normal[1] * p[1] + normal[2] * p[2]) - offset).abs() / n)
            }
            Region::Intersection(a, b) => match (a.boundary_distance(p), b.boundary_distance(p)) {
                (Some(x), Some(y)) if a.contains(p) && b.contains(p) => Some(x.min(y)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Short human-readable descriptor.
    pub fn describe(&self) -> String {
        let fmt_p = |p: &Point| format!("({}, {}, {})", p[0], p[1], p[2]);
        match self {
            Region::All => "all".into(),
            Region::Ball { center, radius } => format!("ball{} r={radius}", fmt_p(center)),
            Region::ClosedBall { center, radius } => {
                format!("closed_ball{} r={radius}", fmt_p(center))
            }
            Region::Cube { center, side } => format!("cube{} side={side}", fmt_p(center)),
            Region::Annulus { center, r_in, r_out } => {
                format!("annulus{} {r_in}<r<{r_out}", fmt_p(center))
            }
            Region::HalfSpace { normal, offset, strict } => {
                format!("halfspace n={} {} {offset}", fmt_p(normal), if *strict { "<" } else { "<=" })
            }
            Region::Sublevel { level, strict, .. } => {
                format!("{{u {} {level}}}", if *strict { "<" } else { "<=" })
            }
            Region::Superlevel { level, strict, .. } => {
                format!("{{u {} {level}}}", if *strict { ">" } else { ">=" })
            }
            Region::Mask { flags, .. } => {
                format!("mask({} nodes)", flags.iter().filter(|&&f| f).count())
            }
            Region::Intersection(a, b) => format!("({} & {})", a.describe(), b.describe()),
            Region::Union(a, b) => format!("({} | {})", a.describe(), b.describe()),
            Region::Difference(a, b) => format!("({} \\ {})", a.describe(), b.describe()),
        }
    }
}

/// Squared distance from every node of `grid` to the nearest node of `target`,
/// by the separable lower-envelope transform. Nodes far from any target get `inf`.
pub fn squared_distance_to(grid: &Grid, target: &[bool]) -> Vec<f64> {
    let input: Vec<f64> = target
        .iter()
        .map(|&t| if t { 0.0 } else { f64::INFINITY })
        .collect();
    let h2 = grid.h() * grid.h();
    crate::contact::envelope::min_plus_quadratic(grid, &input, h2)
}
