use super::dyadic::exact;
use crate::error::{invalid, Result};
use crate::grid::Point;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// Open ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VitaliSelection {
    pub dim: usize,
    pub balls: Vec<Ball>,
    /// Selected indices in selection order.
    pub selected: Vec<usize>,
    /// For every input ball, a selected ball whose 5× dilation contains it.
    pub cover_by: Vec<usize>,
}

fn dist2_exact(a: &Point, b: &Point, dim: usize) -> BigRational {
    (0..dim).fold(BigRational::zero(), |acc, i| {
        let d = exact(a[i]) - exact(b[i]);
        acc + &d * &d
    })
}

fn disjoint(a: &Ball, b: &Ball, dim: usize) -> bool {
    let s = exact(a.radius) + exact(b.radius);
    dist2_exact(&a.center, &b.center, dim) >= &s * &s
}

/// B_{r}(x) ⊆ B_{factor·s}(y), exactly.
fn dilation_contains(outer: &Ball, factor: i64, inner: &Ball, dim: usize) -> bool {
    let reach = exact(outer.radius) * BigRational::from_integer(factor.into()) - exact(inner.radius);
    if reach < BigRational::zero() {
        return false;
    }
    dist2_exact(&outer.center, &inner.center, dim) <= &reach * &reach
}

/// Greedy selection by decreasing radius (ties by input index) of pairwise
/// disjoint balls; every ball meets a selected ball at least as large.
pub fn vitali_select(balls: &[Ball], dim: usize) -> Result<VitaliSelection> {
    if !(1..=3).contains(&dim) {
        return invalid(format!("dimension {dim} not in 1..=3"));
    }
    if let Some(b) = balls.iter().find(|b| !(b.radius > 0.0) || !b.radius.is_finite()) {
        return invalid(format!("ball radius must be positive, got {}", b.radius));
    }
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| balls[b].radius.total_cmp(&balls[a].radius).then(a.cmp(&b)));
    let mut selected: Vec<usize> = Vec::new();
    let mut cover_by = vec![usize::MAX; balls.len()];
    for &i in &order {
        match selected.iter().find(|&&j| !disjoint(&balls[i], &balls[j], dim)) {
            Some(&j) => cover_by[i] = j,
            None => {
                selected.push(i);
                cover_by[i] = i;
            }
        }
    }
    Ok(VitaliSelection { dim, balls: balls.to_vec(), selected, cover_by })
}

impl VitaliSelection {
    /// Selected balls are pairwise disjoint (exact).
    pub fn disjoint(&self) -> bool {
        let s = &self.selected;
        (0..s.len()).all(|a| (a + 1..s.len()).all(|b| disjoint(&self.balls[s[a]], &self.balls[s[b]], self.dim)))
    }

    /// Every ball lies in the 5× dilation of its covering selected ball (exact).
    pub fn five_times_coverage(&self) -> bool {
        self.balls
            .iter()
            .zip(&self.cover_by)
            .all(|(b, &j)| dilation_contains(&self.balls[j], 5, b, self.dim))
    }
}
