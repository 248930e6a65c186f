use super::family::{Family, ParaboloidSign};
use crate::error::{LabError, Result};
use crate::grid::{Grid, GridInfo, Point, Region, ScalarField};
use crate::operators::{gradient_at, hessian_at, SymMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One node within τ of the minimum of u − φ_{y₀}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactEntry {
    pub node: usize,
    pub point: Point,
    pub center: Point,
    /// min over the domain of u − φ_{y₀}
    pub offset: f64,
    /// (u − φ_{y₀})(x₀) − offset, in [0, τ]
    pub gap: f64,
    /// The node attains the minimum (up to rounding).
    pub exact: bool,
    pub gradient: Option<[f64; 3]>,
    /// The node has an axis neighbor outside the domain or the grid.
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactSet {
    pub entries: Vec<ContactEntry>,
    /// Band width τ = 4·|D²φ|·h² + 1e-12.
    pub tolerance: f64,
    /// Rounding scale below which a gap counts as a tie.
    pub tie: f64,
    pub family: String,
    pub grid: GridInfo,
    /// Number of centers searched.
    pub centers: usize,
}

impl ContactSet {
    fn distinct(&self, keep: impl Fn(&ContactEntry) -> bool) -> Vec<usize> {
        let mut v: Vec<usize> = self.entries.iter().filter(|e| keep(e)).map(|e| e.node).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Distinct nodes attaining some minimum: the contact-point set A.
    pub fn contact_points(&self) -> Vec<usize> {
        self.distinct(|e| e.exact)
    }

    /// Distinct exact contact points away from the domain boundary.
    pub fn interior_points(&self) -> Vec<usize> {
        self.distinct(|e| e.exact && !e.boundary)
    }

    /// Distinct nodes of the whole τ band.
    pub fn band_points(&self) -> Vec<usize> {
        self.distinct(|_| true)
    }

    pub fn boundary_contacts(&self) -> usize {
        self.distinct(|e| e.exact && e.boundary).len()
    }

    /// A as a region on the field's grid.
    pub fn region(&self) -> Result<Region> {
        let g = Grid::from_info(&self.grid)?;
        Ok(Region::from_nodes(&g, &self.contact_points()))
    }

    /// CSV point cloud `x,y,z,cx,cy,cz,gap,exact,boundary`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,z,cx,cy,cz,gap,exact,boundary\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{},{},{},{},{},{},{:e},{},{}\n",
                e.point[0], e.point[1], e.point[2], e.center[0], e.center[1], e.center[2], e.gap, e.exact, e.boundary
            ));
        }
        s
    }
}

pub(crate) fn boundary_flags(grid: &Grid, mask: &[bool]) -> Vec<bool> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if !mask[i] {
                return false;
            }
            let ijk = grid.multi(i);
            for a in 0..grid.dim() {
                for s in [-1isize, 1] {
                    let mut off = [0isize; 3];
                    off[a] = s;
                    match grid.shift(ijk, off) {
                        Some(n) if mask[grid.index(n)] => {}
                        _ => return true,
                    }
                }
            }
            false
        })
        .collect()
}

/// All nodes of `domain` within τ of min(u − φ_{y₀}), for every center node y₀.
pub fn contact_set(field: &ScalarField, family: &Family, domain: &Region) -> Result<ContactSet> {
    let g = field.grid();
    let centers = family.centers().nonempty_nodes(g)?;
    let mask = domain.mask(g);
    let nodes: Vec<usize> = (0..g.len()).filter(|&i| mask[i]).collect();
    if nodes.is_empty() {
        return Err(LabError::EmptyRegion);
    }
    let edge = boundary_flags(g, &mask);
    let points: Vec<Point> = nodes.iter().map(|&i| g.point(i)).collect();
    let h = g.h();
    let tolerance = 4.0 * family.hessian_bound() * h * h + 1e-12;
    let scale = field.values().iter().fold(0.0f64, |m, v| m.max(v.abs()))
        + match family {
            super::Family::Paraboloid(f) => 0.5 * f.opening * g.diameter().powi(2) + f.offset.abs(),
            super::Family::Radial(f) => f.supremum(),
        };
    let tie = 1e-12 * (1.0 + scale);
    let per_center: Vec<Vec<ContactEntry>> = centers
        .par_iter()
        .map(|&c| {
            let y = g.point(c);
            let vals: Vec<f64> = nodes
                .iter()
                .zip(&points)
                .map(|(&i, x)| field.at(i) - family.eval(&y, x))
                .collect();
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            nodes
                .iter()
                .zip(&points)
                .zip(&vals)
                .filter(|(_, v)| **v - min <= tolerance.max(tie))
                .map(|((&i, x), v)| ContactEntry {
                    node: i,
                    point: *x,
                    center: y,
                    offset: min,
                    gap: v - min,
                    exact: v - min <= tie,
                    gradient: gradient_at(field, i),
                    boundary: edge[i],
                })
                .collect()
        })
        .collect();
    Ok(ContactSet {
        entries: per_center.into_iter().flatten().collect(),
        tolerance,
        tie,
        family: family.describe(),
        grid: g.info(),
        centers: centers.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportEntry {
    pub node: usize,
    pub point: Point,
    /// T(x₀)
    pub image: Point,
    /// max(det DT, 0)
    pub det: f64,
    pub raw_det: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportRecord {
    pub entries: Vec<TransportEntry>,
    /// Σ of the negative parts removed by clamping.
    pub clamped: f64,
    /// Band nodes skipped because they sit on the domain boundary.
    pub skipped_boundary: usize,
}

impl TransportRecord {
    /// Fraction of `center_set` nodes that are the nearest node of some image.
    pub fn coverage(&self, grid: &Grid, center_set: &Region) -> Result<f64> {
        let centers = center_set.nonempty_nodes(grid)?;
        let mut hit = vec![false; grid.len()];
        for e in &self.entries {
            if grid.covers_box(&e.image, 0.0) {
                hit[grid.nearest(&e.image)] = true;
            }
        }
        Ok(centers.iter().filter(|&&c| hit[c]).count() as f64 / centers.len() as f64)
    }
}

/// Gradient map T on every interior node of the contact band, with the
/// Jacobian determinant from the discrete Hessian.
pub fn transport_map(contact: &ContactSet, field: &ScalarField, family: &Family) -> Result<TransportRecord> {
    let g = field.grid();
    let n = g.dim();
    let mut interior: Vec<usize> = contact
        .entries
        .iter()
        .filter(|e| !e.boundary)
        .map(|e| e.node)
        .collect();
    interior.sort_unstable();
    interior.dedup();
    let mut all = contact.band_points();
    all.retain(|i| interior.binary_search(i).is_err());
    let skipped_boundary = all.len();
    let entries: Vec<TransportEntry> = interior
        .par_iter()
        .map(|&i| {
            let x = g.point(i);
            let du = gradient_at(field, i).ok_or_else(|| LabError::OutsideGrid("contact on grid edge".into()))?;
            let d2u = hessian_at(field, i).ok_or_else(|| LabError::OutsideGrid("contact on grid edge".into()))?;
            let (image, raw_det) = match family {
                Family::Paraboloid(f) => {
                    let s = match f.sign {
                        ParaboloidSign::Concave => 1.0,
                        ParaboloidSign::Convex => -1.0,
                    };
                    let mut t = x;
                    for a in 0..n {
                        t[a] += s * du[a] / f.opening;
                    }
                    let dt = SymMatrix::identity(n).add(&d2u.scale(s / f.opening));
                    (t, dt.det())
                }
                Family::Radial(f) => {
                    let z = f.invert_gradient(&du)?;
                    let phi = f.hessian(&z, n);
                    let mut t = x;
                    for a in 0..n {
                        t[a] -= z[a];
                    }
                    // D²u − Φ ≥ 0 at a contact, so the sign of det DT is (−1)^n·sign det Φ;
                    // the area formula only needs |det DT|.
                    (t, (phi.sub(&d2u).det() / phi.det()).abs())
                }
            };
            Ok(TransportEntry { node: i, point: x, image, det: raw_det.max(0.0), raw_det })
        })
        .collect::<Result<_>>()?;
    let clamped = entries.iter().map(|e| (-e.raw_det).max(0.0)).sum();
    Ok(TransportRecord { entries, clamped, skipped_boundary })
}
