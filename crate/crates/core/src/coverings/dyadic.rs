use crate::error::{invalid, LabError, Result};
use crate::grid::{Grid, Point, Region};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Closed dyadic cube of Q̄₁ = [−1/2, 1/2]ⁿ: generation k, integer position
/// c ∈ [0, 2^k)ⁿ, covering Π [−1/2 + cᵢ2^{−k}, −1/2 + (cᵢ+1)2^{−k}].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub k: u32,
    pub coords: [u64; 3],
}

impl DyadicCube {
    pub const ROOT: DyadicCube = DyadicCube { k: 0, coords: [0; 3] };

    pub fn side(&self) -> f64 {
        (-(self.k as f64)).exp2()
    }

    pub fn measure(&self, dim: usize) -> f64 {
        self.side().powi(dim as i32)
    }

    pub fn lower(&self, axis: usize) -> f64 {
        -0.5 + self.coords[axis] as f64 * self.side()
    }

    pub fn upper(&self, axis: usize) -> f64 {
        -0.5 + (self.coords[axis] + 1) as f64 * self.side()
    }

    pub fn center(&self, dim: usize) -> Point {
        let mut p = [0.0; 3];
        for (a, slot) in p.iter_mut().enumerate().take(dim) {
            *slot = -0.5 + (self.coords[a] as f64 + 0.5) * self.side();
        }
        p
    }

    pub fn children(&self, dim: usize) -> Vec<DyadicCube> {
        (0..1u64 << dim)
            .map(|bits| {
                let mut c = [0u64; 3];
                for (a, slot) in c.iter_mut().enumerate().take(dim) {
                    *slot = 2 * self.coords[a] + ((bits >> a) & 1);
                }
                DyadicCube { k: self.k + 1, coords: c }
            })
            .collect()
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        if self.k == 0 {
            return None;
        }
        let mut c = self.coords;
        for v in c.iter_mut() {
            *v /= 2;
        }
        Some(DyadicCube { k: self.k - 1, coords: c })
    }

    /// `self` contains `other` (as closed sets, both dyadic).
    pub fn contains(&self, other: &DyadicCube) -> bool {
        if other.k < self.k {
            return false;
        }
        let s = other.k - self.k;
        (0..3).all(|a| other.coords[a] >> s == self.coords[a])
    }

    /// Interiors are disjoint iff neither contains the other.
    pub fn interiors_disjoint(&self, other: &DyadicCube) -> bool {
        !self.contains(other) && !other.contains(self)
    }

    pub(crate) fn bounds_exact(&self, axis: usize) -> (BigRational, BigRational) {
        let den = BigInt::one() << self.k as usize;
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let lo = BigRational::new(BigInt::from(self.coords[axis]), den.clone()) - &half;
        let hi = BigRational::new(BigInt::from(self.coords[axis] + 1), den) - half;
        (lo, hi)
    }
}

/// How a closed cube sits relative to a region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Inside,
    Outside,
    Partial,
}

pub(crate) fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

fn nearest_farthest(cube: &DyadicCube, dim: usize, center: &Point) -> (BigRational, BigRational) {
    let mut near = BigRational::zero();
    let mut far = BigRational::zero();
    for (a, c) in center.iter().enumerate().take(dim) {
        let c = exact(*c);
        let (lo, hi) = cube.bounds_exact(a);
        let gap = if c < lo {
            &lo - &c
        } else if c > hi {
            &c - &hi
        } else {
            BigRational::zero()
        };
        let reach = (&lo - &c).abs().max((&hi - &c).abs());
        near += &gap * &gap;
        far += &reach * &reach;
    }
    (near, far)
}

fn nearest_farthest_f64(cube: &DyadicCube, dim: usize, center: &Point) -> (f64, f64) {
    let mut near = 0.0;
    let mut far = 0.0;
    for (a, &c) in center.iter().enumerate().take(dim) {
        let (lo, hi) = (cube.lower(a), cube.upper(a));
        let gap = if c < lo { lo - c } else if c > hi { c - hi } else { 0.0 };
        let reach = (lo - c).abs().max((hi - c).abs());
        near += gap * gap;
        far += reach * reach;
    }
    (near, far)
}

/// Compares a and b, falling back to exact arithmetic when the floating
/// values are too close to call.
fn filtered_cmp(a: f64, b: f64, exact: impl FnOnce() -> Ordering) -> Ordering {
    if (a - b).abs() > 1e-9 * (a.abs() + b.abs()) {
        a.total_cmp(&b)
    } else {
        exact()
    }
}

/// Lazily computed exact squared distances from a center to a cube.
struct Distances<'a> {
    cube: &'a DyadicCube,
    dim: usize,
    center: &'a Point,
    exact: Option<(BigRational, BigRational)>,
    approx: (f64, f64),
}

impl<'a> Distances<'a> {
    fn new(cube: &'a DyadicCube, dim: usize, center: &'a Point) -> Self {
        Distances { cube, dim, center, exact: None, approx: nearest_farthest_f64(cube, dim, center) }
    }

    fn exact(&mut self) -> &(BigRational, BigRational) {
        if self.exact.is_none() {
            self.exact = Some(nearest_farthest(self.cube, self.dim, self.center));
        }
        self.exact.as_ref().unwrap()
    }

    /// Ordering of the nearest (or farthest) squared distance against r².
    fn cmp(&mut self, farthest: bool, r: f64) -> Ordering {
        let a = if farthest { self.approx.1 } else { self.approx.0 };
        let mut exact = || {
            let (near, far) = self.exact();
            let v = if farthest { far } else { near };
            v.cmp(&(exact_sq(r)))
        };
        if (a - r * r).abs() > 1e-9 * (a.abs() + r * r) {
            a.total_cmp(&(r * r))
        } else {
            exact()
        }
    }
}

fn exact_sq(r: f64) -> BigRational {
    exact(r) * exact(r)
}

/// Exact relation for closed-form regions; node-based for grid-defined ones.
pub fn classify(region: &Region, cube: &DyadicCube, dim: usize) -> Result<Relation> {
    use Ordering::*;
    use Relation::*;
    Ok(match region {
        Region::All => Inside,
        Region::Ball { center, radius } => {
            let mut d = Distances::new(cube, dim, center);
            if d.cmp(true, *radius) == Less {
                Inside
            } else if d.cmp(false, *radius) != Less {
                Outside
            } else {
                Partial
            }
        }
        Region::ClosedBall { center, radius } => {
            let mut d = Distances::new(cube, dim, center);
            if d.cmp(true, *radius) != Greater {
                Inside
            } else if d.cmp(false, *radius) == Greater {
                Outside
            } else {
                Partial
            }
        }
        Region::Annulus { center, r_in, r_out } => {
            let mut d = Distances::new(cube, dim, center);
            if d.cmp(false, *r_in) == Greater && d.cmp(true, *r_out) == Less {
                Inside
            } else if d.cmp(true, *r_in) != Greater || d.cmp(false, *r_out) != Less {
                Outside
            } else {
                Partial
            }
        }
        Region::Cube { center, side } => {
            let mut inside = true;
            let mut outside = false;
            for (a, &c) in center.iter().enumerate().take(dim) {
                let (lo, hi) = (cube.lower(a), cube.upper(a));
                let (rlo, rhi) = (c - 0.5 * side, c + 0.5 * side);
                let ex = |x: bool, upper_end: bool| {
                    let half = exact(*side) / BigRational::from_integer(BigInt::from(2));
                    let (elo, ehi) = cube.bounds_exact(a);
                    let r = if upper_end { exact(c) + half } else { exact(c) - half };
                    if x { ehi.cmp(&r) } else { elo.cmp(&r) }
                };
                // lo vs rlo, hi vs rhi, hi vs rlo, lo vs rhi
                let lo_rlo = filtered_cmp(lo, rlo, || ex(false, false));
                let hi_rhi = filtered_cmp(hi, rhi, || ex(true, true));
                let hi_rlo = filtered_cmp(hi, rlo, || ex(true, false));
                let lo_rhi = filtered_cmp(lo, rhi, || ex(false, true));
                if lo_rlo == Less || hi_rhi == Greater {
                    inside = false;
                }
                if hi_rlo == Less || lo_rhi == Greater {
                    outside = true;
                }
            }
            if outside {
                Outside
            } else if inside {
                Inside
            } else {
                Partial
            }
        }
        Region::HalfSpace { normal, offset, strict } => {
            let (mut min_f, mut max_f) = (0.0, 0.0);
            for (a, &n) in normal.iter().enumerate().take(dim) {
                let (x, y) = (n * cube.lower(a), n * cube.upper(a));
                min_f += x.min(y);
                max_f += x.max(y);
            }
            let exact_bounds = || {
                let mut min = BigRational::zero();
                let mut max = BigRational::zero();
                for (a, n) in normal.iter().enumerate().take(dim) {
                    let n = exact(*n);
                    let (lo, hi) = cube.bounds_exact(a);
                    let (x, y) = (&n * &lo, &n * &hi);
                    if x < y {
                        min += x;
                        max += y;
                    } else {
                        min += y;
                        max += x;
                    }
                }
                (min, max)
            };
            let off = *offset;
            let cmp_max = filtered_cmp(max_f, off, || exact_bounds().1.cmp(&exact(off)));
            let cmp_min = filtered_cmp(min_f, off, || exact_bounds().0.cmp(&exact(off)));
            let (inside, outside) = if *strict {
                (cmp_max == Less, cmp_min != Less)
            } else {
                (cmp_max != Greater, cmp_min == Greater)
            };
            if inside {
                Inside
            } else if outside {
                Outside
            } else {
                Partial
            }
        }
        Region::Intersection(a, b) => match (classify(a, cube, dim)?, classify(b, cube, dim)?) {
            (Outside, _) | (_, Outside) => Outside,
            (Inside, Inside) => Inside,
            _ => Partial,
        },
        Region::Union(a, b) => match (classify(a, cube, dim)?, classify(b, cube, dim)?) {
            (Inside, _) | (_, Inside) => Inside,
            (Outside, Outside) => Outside,
            _ => Partial,
        },
        Region::Difference(a, b) => match (classify(a, cube, dim)?, classify(b, cube, dim)?) {
            (Outside, _) | (_, Inside) => Outside,
            (Inside, Outside) => Inside,
            _ => Partial,
        },
        Region::Sublevel { field, .. } | Region::Superlevel { field, .. } => {
            classify_on_grid(region, field.grid(), cube, dim)?
        }
        Region::Mask { grid, .. } => classify_on_grid(region, grid, cube, dim)?,
    })
}

/// Grid-defined sets are judged on the grid nodes of the closed cube, which
/// must span at least one full cell per axis.
fn classify_on_grid(region: &Region, grid: &Grid, cube: &DyadicCube, dim: usize) -> Result<Relation> {
    if grid.dim() != dim {
        return Err(LabError::GridMismatch("region grid dimension differs".into()));
    }
    if cube.side() < grid.h() * (1.0 - 1e-12) {
        return Err(LabError::InvalidParameter(format!(
            "max_depth exceeds exact-predicate capability: cube side {} below grid spacing {}",
            cube.side(),
            grid.h()
        )));
    }
    let mut ranges = [(0usize, 0usize); 3];
    for (a, r) in ranges.iter_mut().enumerate().take(dim) {
        let o = grid.origin()[a];
        let lo = ((cube.lower(a) - o) / grid.h() - 1e-9).ceil().max(0.0) as usize;
        let hi = ((cube.upper(a) - o) / grid.h() + 1e-9).floor();
        if hi < 0.0 {
            return Ok(Relation::Outside);
        }
        let hi = (hi as usize).min(grid.counts()[a] - 1);
        if lo > hi {
            return Ok(Relation::Outside);
        }
        *r = (lo, hi);
    }
    let (mut any_in, mut any_out) = (false, false);
    for i in ranges[0].0..=ranges[0].1 {
        for j in ranges[1].0..=ranges[1].1 {
            for k in ranges[2].0..=ranges[2].1 {
                if region.contains(&grid.point_of([i, j, k])) {
                    any_in = true;
                } else {
                    any_out = true;
                }
                if any_in && any_out {
                    return Ok(Relation::Partial);
                }
            }
        }
    }
    Ok(if any_in { Relation::Inside } else { Relation::Outside })
}

/// A point of the cube outside `region`: the center and corners are tried
/// first (enough for convex regions), then partial sub-cubes down to `budget`
/// further generations.
pub fn outside_witness(region: &Region, cube: &DyadicCube, dim: usize, budget: u32) -> Option<Point> {
    match classify(region, cube, dim).ok()? {
        Relation::Inside => None,
        Relation::Outside => Some(cube.center(dim)),
        Relation::Partial => {
            let mut candidates = vec![cube.center(dim)];
            for bits in 0..1u32 << dim {
                let mut p = [0.0; 3];
                for (a, slot) in p.iter_mut().enumerate().take(dim) {
                    *slot = if (bits >> a) & 1 == 1 { cube.upper(a) } else { cube.lower(a) };
                }
                candidates.push(p);
            }
            if let Some(p) = candidates.into_iter().find(|p| !region.contains(p)) {
                return Some(p);
            }
            if budget == 0 {
                return None;
            }
            cube.children(dim)
                .iter()
                .find_map(|c| outside_witness(region, c, dim, budget - 1))
        }
    }
}

/// Maximal dyadic cubes inside E.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub dim: usize,
    pub cubes: Vec<DyadicCube>,
    pub max_depth: u32,
    /// Total measure of the finest partial cubes; bounds |E ∖ ∪Q| from above.
    pub residual_measure: f64,
    /// Per selected cube, a point of its progenitor outside E (None for the root).
    pub witnesses: Vec<Option<Point>>,
    pub notes: Vec<String>,
}

impl Decomposition {
    pub fn covered_measure(&self) -> f64 {
        self.cubes.iter().map(|c| c.measure(self.dim)).sum()
    }

    /// Σ|Q| as an exact binary rational.
    pub fn covered_exact(&self) -> BigRational {
        self.cubes.iter().fold(BigRational::zero(), |acc, c| {
            acc + BigRational::new(BigInt::one(), BigInt::one() << (c.k as usize * self.dim))
        })
    }

    /// Pairwise interior-disjointness (exact, integer arithmetic).
    pub fn pairwise_disjoint(&self) -> bool {
        let mut sorted = self.cubes.clone();
        sorted.sort();
        // Any nesting pair has an ancestor/descendant relation, so checking
        // every cube's ancestor chain against the set is enough.
        let set: std::collections::HashSet<DyadicCube> = sorted.iter().cloned().collect();
        if set.len() != sorted.len() {
            return false;
        }
        sorted.iter().all(|c| {
            let mut p = c.parent();
            while let Some(q) = p {
                if set.contains(&q) {
                    return false;
                }
                p = q.parent();
            }
            true
        })
    }

    /// CSV `k,x0,x1,y0,y1,z0,z1` rectangles.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,x0,x1,y0,y1,z0,z1\n");
        for c in &self.cubes {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.k,
                c.lower(0),
                c.upper(0),
                c.lower(1),
                c.upper(1),
                c.lower(2),
                c.upper(2)
            ));
        }
        s
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return invalid(format!("dimension {dim} not in 1..=3"));
    }
    Ok(())
}

/// Dyadic cubes Q ⊆ E whose progenitor is not contained in E.
///
/// Partial cubes are subdivided until generation max_depth + 1; the partial
/// cubes left at that generation form the residual.
pub fn dyadic_decomposition(e: &Region, dim: usize, max_depth: u32) -> Result<Decomposition> {
    check_dim(dim)?;
    if max_depth > 40 {
        return invalid("max_depth above 40 is not supported");
    }
    let mut cubes = Vec::new();
    let mut witnesses = Vec::new();
    let mut residual = 0.0;
    let mut frontier = vec![DyadicCube::ROOT];
    let last = max_depth + 1;
    while let Some(q) = frontier.pop() {
        match classify(e, &q, dim)? {
            Relation::Inside => {
                let w = q.parent().and_then(|p| outside_witness(e, &p, dim, 8));
                cubes.push(q);
                witnesses.push(w);
            }
            Relation::Outside => {}
            Relation::Partial => {
                if q.k >= last {
                    residual += q.measure(dim);
                } else {
                    frontier.extend(q.children(dim).into_iter().rev());
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..cubes.len()).collect();
    order.sort_by_key(|&i| cubes[i]);
    let cubes: Vec<DyadicCube> = order.iter().map(|&i| cubes[i]).collect();
    let witnesses = order.iter().map(|&i| witnesses[i]).collect();
    let mut notes = Vec::new();
    if matches!(e, Region::Sublevel { .. } | Region::Superlevel { .. } | Region::Mask { .. }) {
        notes.push("grid-defined set treated as the union of its closed cells, judged on nodes".into());
    }
    Ok(Decomposition { dim, cubes, max_depth, residual_measure: residual, witnesses, notes })
}

/// Calderón–Zygmund selection of the dyadic cubes where F has density > 1 − η.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CzSelection {
    pub dim: usize,
    pub cubes: Vec<DyadicCube>,
    /// Density of F in each selected cube.
    pub densities: Vec<f64>,
    /// Largest density among all strict ancestors of each selected cube.
    pub predecessor_max: Vec<f64>,
    pub max_depth: u32,
    /// Measure of F not covered by the selected cubes.
    pub residual_measure: f64,
    pub f_measure: f64,
}

/// Densities are exact counts over the cell centers of generation
/// `max_depth`; unions of dyadic cubes of generation ≤ max_depth are
/// therefore measured without error.
pub fn cz_selection(f: &Region, dim: usize, eta: f64, max_depth: u32) -> Result<CzSelection> {
    check_dim(dim)?;
    if !(eta > 0.0 && eta < 1.0) {
        return invalid(format!("eta = {eta} not in (0,1)"));
    }
    if max_depth as usize * dim > 26 {
        return invalid("max_depth too large for cell-center counting");
    }
    let side = 1u64 << max_depth;
    let cells = (side as usize).pow(dim as u32);
    let h = 1.0 / side as f64;
    let mut member = vec![false; cells];
    for (idx, slot) in member.iter_mut().enumerate() {
        let mut p = [0.0; 3];
        let mut rest = idx;
        for a in (0..dim).rev() {
            p[a] = -0.5 + ((rest % side as usize) as f64 + 0.5) * h;
            rest /= side as usize;
        }
        *slot = f.contains(&p);
    }
    let count_in = |q: &DyadicCube| -> (u64, u64) {
        let s = max_depth - q.k;
        let span = 1u64 << s;
        let mut inside = 0u64;
        let mut total = 0u64;
        let range = |a: usize| if a < dim { q.coords[a] * span..(q.coords[a] + 1) * span } else { 0..1 };
        for i in range(0) {
            for j in range(1) {
                for k in range(2) {
                    let c = [i, j, k];
                    let mut idx = 0usize;
                    for &ca in c.iter().take(dim) {
                        idx = idx * side as usize + ca as usize;
                    }
                    total += 1;
                    if member[idx] {
                        inside += 1;
                    }
                }
            }
        }
        (inside, total)
    };
    let threshold = 1.0 - eta;
    let (fin, ftot) = count_in(&DyadicCube::ROOT);
    let root_density = fin as f64 / ftot as f64;
    if root_density > threshold {
        return Err(LabError::Hypothesis(format!(
            "root too dense: density {root_density} > 1 - eta"
        )));
    }
    let mut cubes = Vec::new();
    let mut densities = Vec::new();
    let mut predecessor_max = Vec::new();
    let mut covered = vec![false; cells];
    let mut stack = vec![(DyadicCube::ROOT, root_density)];
    while let Some((q, pmax)) = stack.pop() {
        if q.k >= max_depth {
            continue;
        }
        for c in q.children(dim) {
            let (i, t) = count_in(&c);
            if i == 0 {
                continue;
            }
            let d = i as f64 / t as f64;
            if d > threshold {
                cubes.push(c);
                densities.push(d);
                predecessor_max.push(pmax);
                let s = max_depth - c.k;
                let span = 1u64 << s;
                let range = |a: usize| if a < dim { c.coords[a] * span..(c.coords[a] + 1) * span } else { 0..1 };
                for x in range(0) {
                    for y in range(1) {
                        for z in range(2) {
                            let cc = [x, y, z];
                            let mut idx = 0usize;
                            for &ca in cc.iter().take(dim) {
                                idx = idx * side as usize + ca as usize;
                            }
                            covered[idx] = true;
                        }
                    }
                }
            } else {
                stack.push((c, pmax.max(d)));
            }
        }
    }
    let cell = h.powi(dim as i32);
    let residual = member.iter().zip(&covered).filter(|(m, c)| **m && !**c).count() as f64 * cell;
    Ok(CzSelection {
        dim,
        cubes,
        densities,
        predecessor_max,
        max_depth,
        residual_measure: residual,
        f_measure: fin as f64 * cell,
    })
}
